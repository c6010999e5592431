use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CMat;

type Evaluator = dyn Fn(Complex64) -> CMat + Send + Sync;

/// A square matrix-valued family `λ ↦ F(λ)` of fixed dimension.
///
/// The evaluator must be pure: the same `λ` always yields a bit-identical
/// matrix. Handles are cheap to clone and can be shared across threads.
#[derive(Clone)]
pub struct FamilyHandle {
    dim: usize,
    label: String,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for FamilyHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilyHandle")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl FamilyHandle {
    pub fn new<F>(dim: usize, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(Complex64) -> CMat + Send + Sync + 'static,
    {
        FamilyHandle {
            dim,
            label: label.into(),
            eval: Arc::new(eval),
        }
    }

    /// A 1×1 family from a scalar function.
    pub fn scalar<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(1, label, move |lambda| {
            DMatrix::from_element(1, 1, f(lambda))
        })
    }

    /// A diagonal family with the given entry functions.
    pub fn diagonal<F>(dim: usize, label: impl Into<String>, entry: F) -> Self
    where
        F: Fn(usize, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(dim, label, move |lambda| {
            let mut m = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                m[(i, i)] = entry(i, lambda);
            }
            m
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn evaluate(&self, lambda: Complex64) -> CMat {
        let m = (self.eval)(lambda);
        debug_assert_eq!(
            m.shape(),
            (self.dim, self.dim),
            "family {} returned wrong shape",
            self.label
        );
        m
    }

    /// `λ ↦ g(λ) F(λ)` for a scalar function `g`.
    pub fn scaled<G>(&self, label: impl Into<String>, g: G) -> Self
    where
        G: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let inner = self.clone();
        Self::new(self.dim, label, move |lambda| {
            inner.evaluate(lambda) * g(lambda)
        })
    }

    /// `λ ↦ F(φ(λ))`.
    pub fn reparametrized<G>(&self, label: impl Into<String>, phi: G) -> Self
    where
        G: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let inner = self.clone();
        Self::new(self.dim, label, move |w| inner.evaluate(phi(w)))
    }

    /// Pointwise product `λ ↦ F(λ) G(λ)`.
    pub fn product(&self, other: &FamilyHandle) -> Self {
        assert_eq!(
            self.dim, other.dim,
            "product of families with different dimensions"
        );
        let (a, b) = (self.clone(), other.clone());
        let label = format!("({})·({})", self.label, other.label);
        Self::new(self.dim, label, move |lambda| {
            a.evaluate(lambda) * b.evaluate(lambda)
        })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &FamilyHandle) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let (da, db) = (self.dim, other.dim);
        let label = format!("({})⊕({})", self.label, other.label);
        Self::new(da + db, label, move |lambda| {
            let mut m = DMatrix::zeros(da + db, da + db);
            m.view_mut((0, 0), (da, da)).copy_from(&a.evaluate(lambda));
            m.view_mut((da, da), (db, db))
                .copy_from(&b.evaluate(lambda));
            m
        })
    }

    /// Pointwise inverse `λ ↦ F(λ)⁻¹`. Singular evaluations produce NaN
    /// entries, which the contour guards reject.
    pub fn inverted(&self) -> Self {
        let inner = self.clone();
        let dim = self.dim;
        let label = format!("({})⁻¹", self.label);
        Self::new(dim, label, move |lambda| {
            inner.evaluate(lambda).try_inverse().unwrap_or_else(|| {
                DMatrix::from_element(dim, dim, Complex64::new(f64::NAN, f64::NAN))
            })
        })
    }

    /// The identically-zero family.
    pub fn zero(dim: usize, label: impl Into<String>) -> Self {
        Self::new(dim, label, move |_| DMatrix::zeros(dim, dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_sum_places_blocks() {
        let a = FamilyHandle::scalar("a", |l| l);
        let b = FamilyHandle::diagonal(2, "b", |i, l| l + i as f64);
        let s = a.direct_sum(&b);
        let m = s.evaluate(Complex64::new(2.0, 0.0));
        assert_eq!(s.dim(), 3);
        assert_eq!(m[(0, 0)], Complex64::new(2.0, 0.0));
        assert_eq!(m[(2, 2)], Complex64::new(3.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn inverse_of_singular_is_nan() {
        let f = FamilyHandle::scalar("λ", |l| l);
        let m = f.inverted().evaluate(Complex64::new(0.0, 0.0));
        assert!(m[(0, 0)].re.is_nan());
    }
}
