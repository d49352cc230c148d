//! Scalar abstraction: exact rationals or binary64 floats behind one trait.
//!
//! Verification suites run on [`crate::Rat`] (arbitrary-precision rationals,
//! kept in lowest terms by construction), where a zero residual is an exact
//! zero. The `f64` instance exists for the eigenvalue demo and long
//! convergence traces; its zero tests use a max-coefficient tolerance of
//! `1e-9`. The two never mix inside one lattice: the scalar type is a type
//! parameter, fixed per computation.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Tolerance used by `f64` zero tests on lattice values and coefficients.
pub const FLOAT_ZERO_TOL: f64 = 1e-9;

/// The numeric substrate for every lattice quantity.
pub trait Scalar:
    Num + Signed + Clone + PartialEq + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// True for exact arithmetic (no rounding, structural equality).
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    /// `num / den`; panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Exact zero test in exact mode; `|x| <= 1e-9` in float mode.
    fn is_effectively_zero(&self) -> bool;

    /// Lossy view, used only for diagnostics and float-mode rates.
    fn to_f64(&self) -> f64;

    /// Parse `"p"`, `"p/q"`, or (float mode) a decimal literal.
    fn parse_ratio(s: &str) -> Option<Self>;

    /// Render as `"p"` or `"p/q"`; floats render as decimal literals.
    fn render_ratio(&self) -> String;

    /// Integer power with negative exponents inverting; panics on `0^-k`.
    fn pow_i(&self, exp: i64) -> Self {
        if exp == 0 {
            return Self::one();
        }
        let mut base = if exp < 0 {
            assert!(!self.is_zero(), "zero base with negative exponent");
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_effectively_zero(&self) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_ratio(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().ok()?;
                let q: BigInt = q.trim().parse().ok()?;
                if q.is_zero() {
                    None
                } else {
                    Some(BigRational::new(p, q))
                }
            }
            None => {
                let p: BigInt = s.parse().ok()?;
                Some(BigRational::from_integer(p))
            }
        }
    }

    fn render_ratio(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn is_effectively_zero(&self) -> bool {
        self.abs() <= FLOAT_ZERO_TOL
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_ratio(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            if q == 0.0 {
                None
            } else {
                Some(p / q)
            }
        } else {
            s.parse().ok()
        }
    }

    fn render_ratio(&self) -> String {
        format!("{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    #[test]
    fn rational_parse_and_render_round_trip() {
        let x = Rat::parse_ratio("-6/4").unwrap();
        assert_eq!(x, Rat::from_ratio(-3, 2));
        assert_eq!(x.render_ratio(), "-3/2");
        assert_eq!(Rat::parse_ratio("7").unwrap().render_ratio(), "7");
        assert!(Rat::parse_ratio("1/0").is_none());
    }

    #[test]
    fn pow_i_handles_negative_exponents() {
        let x = Rat::from_ratio(2, 3);
        assert_eq!(x.pow_i(3), Rat::from_ratio(8, 27));
        assert_eq!(x.pow_i(-2), Rat::from_ratio(9, 4));
        assert_eq!(x.pow_i(0), Rat::one());
    }

    #[test]
    fn float_zero_uses_tolerance() {
        assert!(5e-10f64.is_effectively_zero());
        assert!(!1e-8f64.is_effectively_zero());
    }
}
