//! Scalar types accepted by the exact combinatorial layer.
//!
//! The configuration-space operators only need field arithmetic, so they are
//! written once over [`Scalar`] and instantiated with `f64` for numerics,
//! `f32` for cheap sweeps and `Ratio<i64>` when an identity should hold with
//! no rounding at all.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + Copy + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Relative size below which a value counts as zero when pivoting.
    const PIVOT_EPS: f64;

    fn of(k: usize) -> Self {
        <Self as FromPrimitive>::from_usize(k).expect("integer not representable in scalar type")
    }

    fn frac(p: usize, q: usize) -> Self {
        Self::of(p) / Self::of(q)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// True when `self` is negligible next to `scale`.
    fn negligible(self, scale: f64) -> bool {
        if Self::PIVOT_EPS == 0.0 {
            self.is_zero()
        } else {
            self.abs().as_f64() <= Self::PIVOT_EPS * scale.max(1.0)
        }
    }
}

impl Scalar for f64 {
    const PIVOT_EPS: f64 = 1e-11;
}

impl Scalar for f32 {
    const PIVOT_EPS: f64 = 1e-5;
}

impl Scalar for Ratio<i64> {
    const PIVOT_EPS: f64 = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_frac_is_exact() {
        let third = <Ratio<i64> as Scalar>::frac(1, 3);
        assert_eq!(third * Ratio::from_integer(3), Ratio::from_integer(1));
        assert!((third - third).negligible(1.0));
    }

    #[test]
    fn float_negligible_uses_scale() {
        assert!(1e-13f64.negligible(1.0));
        assert!(!1e-6f64.negligible(1.0));
        assert!(1e-9f64.negligible(1e3));
    }
}
