use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared across the crate.
///
/// The variants split into three groups that the batch front end maps onto
/// distinct exit codes: invalid input or contract violations, numerical guards
/// (the contour hit a singularity or the resolution budget ran out), and
/// consistency failures between two routes that should agree.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("family is singular on the contour: node {node} at {lambda} evaluated to {detail}")]
    SingularityOnContour {
        node: usize,
        lambda: Complex64,
        detail: String,
    },

    #[error("pole order exceeds bound {p_max}: |A_-{p_max}| = {norm:e} is above threshold {threshold:e}")]
    PoleOrderExceedsBound {
        p_max: usize,
        norm: f64,
        threshold: f64,
    },

    #[error("determinant vanishes on the contour at node {node} (log|det| = {log_abs_det:.3})")]
    DeterminantVanishes { node: usize, log_abs_det: f64 },

    #[error("phase tracking did not resolve after {nodes} nodes")]
    Resolution { nodes: usize },

    #[error("Toeplitz ranks did not stabilize with {supplied} Taylor coefficients")]
    InsufficientOrder { supplied: usize },

    #[error("Toeplitz rank increments are not nonincreasing: {increments:?}")]
    NonMonotoneRanks { increments: Vec<usize> },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error(
        "eigenvalue placed at grid point {0}: the multiplicity identity is not asserted there"
    )]
    EigenvalueAtGridPoint(String),
}

impl Error {
    /// True for errors raised by contour guards or resolution limits.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::SingularityOnContour { .. }
                | Error::PoleOrderExceedsBound { .. }
                | Error::DeterminantVanishes { .. }
                | Error::Resolution { .. }
                | Error::InsufficientOrder { .. }
                | Error::NonMonotoneRanks { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
