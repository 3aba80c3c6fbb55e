//! Exact rational helpers.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always kept in reduced form.
pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log(x.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    libm::log(top.to_f64().unwrap_or(f64::INFINITY)) + shift as f64 * core::f64::consts::LN_2
}

/// Natural logarithm of a nonnegative rational; `-inf` for zero.
///
/// Numerator and denominator are handled separately, so values far outside
/// the `f64` range still give accurate logarithms.
pub fn ln(r: &Rational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    debug_assert!(!r.is_negative(), "logarithm of a negative rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    match r.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => libm::exp(ln(r)),
    }
}

/// Converts a finite nonnegative float to the closest rational with the
/// given denominator.
pub fn from_f64_with_denominator(v: f64, denom: i64) -> Rational {
    let numer = libm::round(v * denom as f64) as i64;
    ratio(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_of_huge_values() {
        let big = Rational::from_integer(BigInt::from(10).pow(400));
        let expected = 400.0 * libm::log(10.0);
        assert!((ln(&big) - expected).abs() < 1e-9 * expected);
        let tiny = Rational::new(BigInt::one(), BigInt::from(10).pow(400));
        assert!((ln(&tiny) + expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn ln_zero_is_neg_infinity() {
        assert_eq!(ln(&zero()), f64::NEG_INFINITY);
        assert_eq!(ln(&one()), 0.0);
        assert!((ln(&ratio(3, 2)) - libm::log(1.5)).abs() < 1e-15);
    }
}
