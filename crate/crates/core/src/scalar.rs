//! Numeric abstraction shared by every chain, solver and closed form.
//!
//! Everything in this crate is written once against [`Scalar`] and runs on
//! `f64`, `f32`, or exact rationals ([`crate::Exact`]). Exact rationals let
//! rational identities be checked with zero tolerance.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// A real-number field usable as a probability type.
///
/// `Copy` is deliberately not required so that big rationals qualify.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display
{
    /// Residual below which a float solve counts as converged. Zero for
    /// exact types.
    fn solver_tolerance() -> f64;

    /// Lossy conversion used for reporting (residuals, TV distances, CSV).
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Construct from an integer; never fails for the small integers used here.
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer fits the scalar type")
    }

    /// `self^exp` by repeated squaring.
    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }
}

impl Scalar for f64 {
    fn solver_tolerance() -> f64 {
        1e-12
    }
}

impl Scalar for f32 {
    fn solver_tolerance() -> f64 {
        1e-5
    }
}

impl Scalar for BigRational {
    fn solver_tolerance() -> f64 {
        0.0
    }

    fn to_f64_lossy(&self) -> f64 {
        // Ratio<BigInt>::to_f64 is exact-rounded for huge numerators/denominators.
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Evaluate a polynomial given by coefficients from the highest degree down
/// (Horner form).
pub fn horner<T: Scalar>(coeffs_high_to_low: &[i64], x: &T) -> T {
    coeffs_high_to_low
        .iter()
        .fold(T::zero(), |acc, &c| acc * x.clone() + T::from_int(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_naive_expansion() {
        // 2x^3 - 3x + 5 at x = 1.5
        let naive = 2.0 * 1.5f64.powi(3) - 3.0 * 1.5 + 5.0;
        assert_eq!(horner(&[2, 0, -3, 5], &1.5f64), naive);
    }

    #[test]
    fn exact_horner() {
        let v = horner(&[1, -2, 2], &ratio(1, 2));
        assert_eq!(v, ratio(5, 4));
    }

    #[test]
    fn powu_small() {
        assert_eq!(ratio(2, 3).powu(3), ratio(8, 27));
        assert_eq!(0.5f64.powu(0), 1.0);
    }
}
