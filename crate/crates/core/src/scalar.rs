//! Complex scalars in two flavours: double-precision floats and exact
//! rational complex numbers.
//!
//! Every algebraic routine in this crate is generic over [`Scalar`], so the
//! same code runs in floating mode (default) and in exact mode whenever the
//! inputs are rational.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Double-precision complex number.
pub type C64 = Complex<f64>;

/// Exact complex number with arbitrary-precision rational parts.
pub type CRational = Complex<BigRational>;

/// Default absolute tolerance for zero tests and polynomial trimming.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Field of complex coefficients used throughout the crate.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    /// `true` when arithmetic is exact and tolerances are ignored.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;

    /// Builds `re + i·im` from exact rational parts. Floating mode rounds.
    fn from_rationals(re: &BigRational, im: &BigRational) -> Self;

    fn to_c64(&self) -> C64;

    /// Modulus, approximated in `f64` for exact scalars.
    fn magnitude(&self) -> f64;

    /// Zero test under an absolute tolerance; exact scalars test for `0`.
    fn is_zero_tol(&self, tol: f64) -> bool;

    fn is_exact_zero(&self) -> bool;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex::new(1.0, 0.0)
    }

    fn from_i64(n: i64) -> Self {
        Complex::new(n as f64, 0.0)
    }

    fn from_rationals(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(rational_to_f64(re), rational_to_f64(im))
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_zero_tol(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn is_exact_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Scalar for CRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    fn from_rationals(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(re.clone(), im.clone())
    }

    fn to_c64(&self) -> C64 {
        Complex::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.is_exact_zero()
    }

    fn is_exact_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators and denominators overflow the direct conversion.
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Parses a rational literal: an integer, a decimal (`-0.25`, `1e-3`) or a
/// fraction (`3/4`). Decimals are converted exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let negative = mantissa.starts_with('-');
    let digits = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().unwrap_or_default();
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Exact conversion of a finite `f64` through its shortest decimal form.
pub fn f64_to_rational(v: f64) -> Option<BigRational> {
    if !v.is_finite() {
        return None;
    }
    parse_rational(&format!("{v:e}"))
}

/// Rounds `x` up to the next integer, returning at least `0`.
pub(crate) fn ceil_nonneg(x: f64) -> usize {
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        x.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions_exactly() {
        let q = parse_rational("-0.25").unwrap();
        assert_eq!(q, BigRational::new((-1).into(), 4.into()));
        let q = parse_rational("3/4").unwrap();
        assert_eq!(q, BigRational::new(3.into(), 4.into()));
        let q = parse_rational("1.5e2").unwrap();
        assert_eq!(q, BigRational::from_integer(150.into()));
        let q = parse_rational("0.1").unwrap();
        assert_eq!(q, BigRational::new(1.into(), 10.into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn float_roundtrip_through_rational() {
        for v in [0.1, -2.5e-7, 1.0 / 3.0, 12345.678] {
            let q = f64_to_rational(v).unwrap();
            assert_eq!(rational_to_f64(&q), v);
        }
    }

    #[test]
    fn exact_zero_ignores_tolerance() {
        let tiny = CRational::from_ratio(1, 1_000_000_000_000_000);
        assert!(!tiny.is_zero_tol(1.0));
        assert!(C64::new(1e-13, 0.0).is_zero_tol(1e-12));
    }
}
