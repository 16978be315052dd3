//! Coefficient fields.
//!
//! Every algebraic object in the crate is generic over a [`Coeff`] field:
//! exact rationals ([`Rational`]) or double-precision complex numbers
//! ([`Complex`]). A value of one mode can never meet a value of the other
//! inside generic code. The run-time tagged [`Scalar`] is used at the I/O
//! boundary, where the mode is only known after parsing, and its checked
//! arithmetic rejects mixing.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, RankInfo};

pub type Rational = BigRational;
pub type Complex = num_complex::Complex64;

/// Relative magnitude below which FLOAT coefficients are pruned.
pub const FLOAT_PRUNE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const MODE: Mode;

    fn from_int(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex;
    fn to_scalar(&self) -> Scalar;
    fn from_scalar(s: &Scalar) -> Result<Self>;

    /// Rank of a dense row-major matrix.
    fn rank(rows: &[Vec<Self>], cols: usize) -> RankInfo;

    /// Basis of the right kernel of a dense row-major matrix.
    fn kernel(rows: &[Vec<Self>], cols: usize) -> Vec<Vec<Self>>;

    /// Whether `self` is indistinguishable from zero at coefficient scale `scale`.
    fn negligible(&self, scale: f64) -> bool;
}

impl Coeff for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn to_complex(&self) -> Complex {
        Complex::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Exact(q) => Ok(q.clone()),
            Scalar::Float(_) => Err(Error::ModeMismatch {
                left: "exact",
                right: "float",
            }),
        }
    }

    fn rank(rows: &[Vec<Self>], cols: usize) -> RankInfo {
        linalg::rank_exact(rows, cols)
    }

    fn kernel(rows: &[Vec<Self>], cols: usize) -> Vec<Vec<Self>> {
        linalg::kernel_exact(rows, cols)
    }

    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

impl Coeff for Complex {
    const MODE: Mode = Mode::Float;

    fn from_int(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }

    fn from_bigint(v: &BigInt) -> Self {
        Complex::new(v.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex {
        *self
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Float(*self)
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Float(c) => Ok(*c),
            Scalar::Exact(_) => Err(Error::ModeMismatch {
                left: "float",
                right: "exact",
            }),
        }
    }

    fn rank(rows: &[Vec<Self>], cols: usize) -> RankInfo {
        linalg::rank_float(rows, cols)
    }

    fn kernel(rows: &[Vec<Self>], cols: usize) -> Vec<Vec<Self>> {
        linalg::kernel_float(rows, cols)
    }

    fn negligible(&self, scale: f64) -> bool {
        self.norm() <= FLOAT_PRUNE_REL * scale || self.norm() == 0.0
    }
}

/// Drops zero coefficients; in FLOAT mode also drops those below
/// `FLOAT_PRUNE_REL` times the largest magnitude present.
pub fn prune<K: Ord + Clone, C: Coeff>(map: &mut BTreeMap<K, C>) {
    let scale = match C::MODE {
        Mode::Exact => 0.0,
        Mode::Float => map.values().map(Coeff::magnitude).fold(0.0, f64::max),
    };
    map.retain(|_, c| !c.negligible(scale));
}

/// Converts an exact rational to the complex field.
pub fn rational_to_complex(q: &Rational) -> Complex {
    q.to_complex()
}

/// Mode-tagged scalar used at the I/O boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(Complex),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(Rational::zero()),
            Mode::Float => Scalar::Float(Complex::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(c) => c.is_zero(),
        }
    }

    fn mismatch(&self, other: &Scalar) -> Error {
        Error::ModeMismatch {
            left: self.mode().name(),
            right: other.mode().name(),
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a + b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a + b)),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a * b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a * b)),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn magnitude(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.magnitude(),
            Scalar::Float(c) => c.norm(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Float(c) => write!(f, "{c}"),
        }
    }
}

/// Parses `"p/q"`, `"p"` or an integer literal into a rational in lowest terms.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Input(format!("not a rational number: {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Input(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Renders a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_stored_in_lowest_terms() {
        let q = parse_rational("6/-4").unwrap();
        assert_eq!(q.numer(), &BigInt::from(-3));
        assert_eq!(q.denom(), &BigInt::from(2));
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(format_rational(&parse_rational("10/5").unwrap()), "2");
    }

    #[test]
    fn parse_rational_rejects_garbage() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("0.5").is_err());
    }

    #[test]
    fn mixed_mode_is_rejected() {
        let a = Scalar::Exact(Rational::from_int(1));
        let b = Scalar::Float(Complex::new(1.0, 0.0));
        assert!(matches!(a.checked_add(&b), Err(Error::ModeMismatch { .. })));
        assert!(matches!(b.checked_mul(&a), Err(Error::ModeMismatch { .. })));
        assert!(Rational::from_scalar(&b).is_err());
        assert!(Complex::from_scalar(&a).is_err());
        assert_eq!(
            a.checked_add(&a).unwrap(),
            Scalar::Exact(Rational::from_int(2))
        );
    }

    #[test]
    fn float_pruning_is_relative() {
        let mut m = BTreeMap::new();
        m.insert(0, Complex::new(1.0, 0.0));
        m.insert(1, Complex::new(1e-13, 0.0));
        m.insert(2, Complex::new(1e-11, 0.0));
        prune(&mut m);
        assert_eq!(m.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
    }
}
