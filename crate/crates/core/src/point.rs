//! Spectral-parameter points: exact rationals for grid points, decimal
//! complex numbers otherwise.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{CheckedSub, Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used when a decimal point is tested against the half-integer grid.
pub const GRID_TOL: f64 = 1e-9;

/// Bound on numerators and denominators of exact points, so grid arithmetic
/// cannot overflow.
const MAX_EXACT: u64 = 1 << 53;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Exact(Rational64),
    Approx(Complex64),
}

impl Point {
    pub fn exact(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput(
                "rational point with zero denominator".into(),
            ));
        }
        if num.unsigned_abs() > MAX_EXACT || den.unsigned_abs() > MAX_EXACT {
            return Err(Error::InvalidInput(format!(
                "rational point {num}/{den} out of range"
            )));
        }
        Ok(Point::Exact(Rational64::new(num, den)))
    }

    pub fn integer(v: i64) -> Self {
        Point::Exact(Rational64::from_integer(v))
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Point::Approx(Complex64::new(re, im))
    }

    pub fn to_c64(&self) -> Complex64 {
        match *self {
            Point::Exact(r) => Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0),
            Point::Approx(z) => z,
        }
    }

    /// The point as a rational with denominator dividing 2, if it is one.
    ///
    /// Exact inputs are tested exactly; decimal inputs are accepted when real
    /// and within [`GRID_TOL`] of a half-integer.
    pub fn as_half_integer(&self) -> Option<Rational64> {
        match *self {
            Point::Exact(r) => (*r.denom() == 1 || *r.denom() == 2).then_some(r),
            Point::Approx(z) => {
                if z.im != 0.0 || !z.re.is_finite() || z.re.abs() > 1e15 {
                    return None;
                }
                let twice = (2.0 * z.re).round();
                ((2.0 * z.re - twice).abs() <= 2.0 * GRID_TOL)
                    .then(|| Rational64::new(twice as i64, 2))
            }
        }
    }

    /// `k ≥ 1` with `self = n/2 − k`, if the point lies on that grid.
    pub fn grid_offset(&self, n: u32) -> Option<u32> {
        let r = self.as_half_integer()?;
        let k = Rational64::new(n as i64, 2) - r;
        if k.is_integer() && k.is_positive() {
            k.to_integer().to_u32()
        } else {
            None
        }
    }

    /// `n − λ`.
    pub fn reflected(&self, n: u32) -> Point {
        match *self {
            Point::Exact(r) => Rational64::from_integer(n as i64).checked_sub(&r).map_or(
                Point::Approx(Complex64::new(n as f64, 0.0) - self.to_c64()),
                Point::Exact,
            ),
            Point::Approx(z) => Point::Approx(Complex64::new(n as f64, 0.0) - z),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Exact(r) if r.denom() == &1 => write!(f, "{}", r.numer()),
            Point::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Point::Approx(z) if z.im.is_sign_negative() => write!(f, "{}-{}i", z.re, -z.im),
            Point::Approx(z) => write!(f, "{}+{}i", z.re, z.im),
        }
    }
}

fn parse_rational(s: &str) -> Option<Rational64> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let valid = |t: &str, signed: bool| {
        let digits = if signed {
            t.strip_prefix('-').unwrap_or(t)
        } else {
            t
        };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num, true) || !valid(den, false) {
        return None;
    }
    let num: i64 = num.parse().ok()?;
    let den: i64 = den.parse().ok()?;
    match Point::exact(num, den).ok()? {
        Point::Exact(r) => Some(r),
        Point::Approx(_) => None,
    }
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let finite = |v: f64| v.is_finite().then_some(v);
    let Some(body) = s.strip_suffix('i') else {
        return finite(s.parse().ok()?).map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().ok()?,
    };
    Some(Complex64::new(finite(re.parse().ok()?)?, finite(im)?))
}

impl FromStr for Point {
    type Err = Error;

    /// Accepts `p`, `p/q` (exact) or a decimal complex such as `0.3-0.7i`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(r) = parse_rational(s) {
            return Ok(Point::Exact(r));
        }
        parse_complex(s)
            .map(Point::Approx)
            .ok_or_else(|| Error::InvalidInput(format!("cannot parse point {s:?}")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Rational { rational: [i64; 2] },
    Complex { complex: [f64; 2] },
    Text(String),
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Point::Exact(r) => PointRepr::Rational {
                rational: [*r.numer(), *r.denom()],
            },
            Point::Approx(z) => PointRepr::Complex {
                complex: [z.re, z.im],
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match PointRepr::deserialize(d)? {
            PointRepr::Rational { rational: [n, den] } => {
                Point::exact(n, den).map_err(D::Error::custom)
            }
            PointRepr::Complex { complex: [re, im] } => {
                if re.is_finite() && im.is_finite() {
                    Ok(Point::complex(re, im))
                } else {
                    Err(D::Error::custom("complex point must be finite"))
                }
            }
            PointRepr::Text(t) => t.parse().map_err(D::Error::custom),
        }
    }
}
