//! Exact rational arithmetic and unit-circle phases.
//!
//! Every exact test in the crate (zero-set membership, orthogonality,
//! residues) runs on [`Rational`]. Floating point only enters at the very
//! last step, when a phase `t` already reduced into `[0, 1)` is turned into
//! `e^(-2πi t)`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Floating-point scalar the numeric paths are generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Send
    + Sync
    + fmt::Debug
    + fmt::Display
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex value produced by numeric evaluation.
pub type ComplexVal<T = f64> = Complex<T>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("gcd(0, 0) is undefined")]
    GcdOfZeros,
    #[error("denominator must be nonzero")]
    ZeroDenominator,
}

/// `num / den` in lowest terms.
pub fn rat(num: i64, den: i64) -> Result<Rational, ExactError> {
    if den == 0 {
        return Err(ExactError::ZeroDenominator);
    }
    Ok(Rational::new(BigInt::from(num), BigInt::from(den)))
}

pub fn rat_int<I: Into<BigInt>>(v: I) -> Rational {
    Rational::from_integer(v.into())
}

/// Exact rational equal to a finite float (every finite double is dyadic).
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Fractional part `t - floor(t)`, in `[0, 1)`.
pub fn frac(t: &Rational) -> Rational {
    t - t.floor()
}

/// Distance from `t` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_int(t: &Rational) -> Rational {
    let f = frac(t);
    let g = Rational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

/// Greatest common divisor of `|a|` and `|b|`.
pub fn int_gcd(a: &BigInt, b: &BigInt) -> Result<BigInt, ExactError> {
    if a.is_zero() && b.is_zero() {
        return Err(ExactError::GcdOfZeros);
    }
    Ok(a.gcd(b))
}

/// Fractional part of `num / den` as a float in `[0, 1)`.
///
/// Uses `i128` arithmetic when the operands fit and falls back to big
/// integers otherwise; either way the reduction itself is exact.
pub fn frac_of_ratio(num: &BigInt, den: &BigInt) -> f64 {
    if let (Some(n), Some(d)) = (num.to_i128(), den.to_i128()) {
        return frac_of_ratio_i128(n, d);
    }
    let (n, d) = if den.is_negative() {
        (-num, -den)
    } else {
        (num.clone(), den.clone())
    };
    let r = n.mod_floor(&d);
    BigRational::new_raw(r, d).to_f64().unwrap_or(0.0)
}

/// `i128` version of [`frac_of_ratio`]; `den` must be nonzero.
#[inline]
pub fn frac_of_ratio_i128(num: i128, den: i128) -> f64 {
    let (n, d) = if den < 0 { (-num, -den) } else { (num, den) };
    let r = n.rem_euclid(d);
    let v = r as f64 / d as f64;
    // r < d, but rounding of two large values can still land on 1.0
    if v >= 1.0 {
        0.0
    } else {
        v
    }
}

/// `e^(-2πi t)` for a float phase already reduced (or not) mod 1.
#[inline]
pub fn unit_phase<T: Real>(t: T) -> ComplexVal<T> {
    let t = t - t.floor();
    let angle = T::TAU() * t;
    let (s, c) = angle.sin_cos();
    Complex::new(c, -s)
}

/// `e^(-2πi t)` evaluated after exact reduction of `t` into `[0, 1)`.
pub fn phase_eval<T: Real>(t: &Rational) -> ComplexVal<T> {
    let reduced = frac(t);
    let tf = reduced.to_f64().unwrap_or(0.0);
    unit_phase(T::from_f64(tf).unwrap_or_else(T::zero))
}

/// The unit complex number `e^(-2πi t)`, kept symbolically with `t ∈ [0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitPhase {
    t: Rational,
}

impl UnitPhase {
    pub fn new(t: &Rational) -> Self {
        Self { t: frac(t) }
    }

    pub fn one() -> Self {
        Self {
            t: Rational::zero(),
        }
    }

    pub fn turns(&self) -> &Rational {
        &self.t
    }

    pub fn is_one(&self) -> bool {
        self.t.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(&-&self.t)
    }

    pub fn eval<T: Real>(&self) -> ComplexVal<T> {
        phase_eval(&self.t)
    }
}

impl Mul for &UnitPhase {
    type Output = UnitPhase;

    // phases multiply by adding their turns
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &UnitPhase) -> UnitPhase {
        UnitPhase::new(&(&self.t + &rhs.t))
    }
}

impl Mul for UnitPhase {
    type Output = UnitPhase;

    fn mul(self, rhs: UnitPhase) -> UnitPhase {
        &self * &rhs
    }
}

impl Add<&Rational> for &UnitPhase {
    type Output = UnitPhase;

    fn add(self, rhs: &Rational) -> UnitPhase {
        UnitPhase::new(&(&self.t + rhs))
    }
}

impl fmt::Display for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^(-2πi·{})", self.t)
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ipv: BigInt = if ip.is_empty() || ip == "-" {
            BigInt::zero()
        } else {
            ip.parse().ok()?
        };
        if fp.is_empty() || !fp.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let scale = BigInt::from(10u32).pow(fp.len() as u32);
        let fpv: BigInt = fp.parse().ok()?;
        let mag = ipv.abs() * &scale + fpv;
        let num = if neg { -mag } else { mag };
        return Some(Rational::new(num, scale));
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(z: ComplexVal, re: f64, im: f64, tol: f64) -> bool {
        (z.re - re).abs() < tol && (z.im - im).abs() < tol
    }

    #[test]
    fn phase_eval_examples() {
        assert!(close(phase_eval(&rat(0, 1).unwrap()), 1.0, 0.0, 1e-15));
        assert!(close(phase_eval(&rat(1, 2).unwrap()), -1.0, 0.0, 1e-15));
        let z: ComplexVal = phase_eval(&rat(1, 3).unwrap());
        assert!(close(z, -0.5, -(3f64).sqrt() / 2.0, 1e-15));
        assert!((z.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_eval_f32() {
        let z: ComplexVal<f32> = phase_eval(&rat(1, 4).unwrap());
        assert!(z.re.abs() < 1e-6 && (z.im + 1.0).abs() < 1e-6);
    }

    #[test]
    fn huge_phase_is_reduced_before_trig() {
        let big = BigInt::from(10u32).pow(40);
        let t = Rational::new(big * 3 + 1, BigInt::from(3));
        let z: ComplexVal = phase_eval(&t);
        assert!(close(z, -0.5, -(3f64).sqrt() / 2.0, 1e-15));
    }

    #[test]
    fn gcd_examples() {
        let g = |a: i64, b: i64| int_gcd(&a.into(), &b.into()).unwrap();
        assert_eq!(g(4, 6), BigInt::from(2));
        assert_eq!(g(1, 12345), BigInt::from(1));
        assert_eq!(g(1, -7), BigInt::from(1));
        assert_eq!(g(82, 83), BigInt::from(1));
        assert_eq!(g(0, -5), BigInt::from(5));
        assert_eq!(int_gcd(&0.into(), &0.into()), Err(ExactError::GcdOfZeros));
    }

    #[test]
    fn unit_phase_composes() {
        let a = UnitPhase::new(&rat(2, 3).unwrap());
        let b = UnitPhase::new(&rat(1, 2).unwrap());
        assert_eq!((&a * &b).turns(), &rat(1, 6).unwrap());
        assert!((&a * &a.conj()).is_one());
        assert_eq!(
            UnitPhase::new(&rat(-1, 4).unwrap()).turns(),
            &rat(3, 4).unwrap()
        );
    }

    #[test]
    fn frac_of_ratio_paths_agree() {
        let n = BigInt::from(-17);
        let d = BigInt::from(5);
        assert!((frac_of_ratio(&n, &d) - 0.6).abs() < 1e-15);
        assert!((frac_of_ratio(&BigInt::from(7), &BigInt::from(-3)) - 2.0 / 3.0).abs() < 1e-15);
        let big = BigInt::from(10u32).pow(50);
        let num = &big * 7 + 1;
        let den = &big * 2;
        assert!((frac_of_ratio(&num, &den) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2).unwrap()));
        assert_eq!(parse_rational("-0.25"), Some(rat(-1, 4).unwrap()));
        assert_eq!(parse_rational("7"), Some(rat(7, 1).unwrap()));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn dist_to_int_values() {
        assert_eq!(dist_to_int(&rat(9, 4).unwrap()), rat(1, 4).unwrap());
        assert_eq!(dist_to_int(&rat(-1, 3).unwrap()), rat(1, 3).unwrap());
        assert_eq!(dist_to_int(&rat(5, 1).unwrap()), rat(0, 1).unwrap());
    }
}
