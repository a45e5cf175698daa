//! Scalar abstraction shared by graphs, signals and the recovery engine.
//!
//! Everything downstream of the degree distributions is generic over a
//! [`Scalar`]: IEEE floats for simulation and an exact rational type for
//! strict-mode checks where equality must be decided without tolerances.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Value type of edge weights, signal entries and check residuals.
pub trait Scalar:
    Copy + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Fractional bits kept when a continuous draw is snapped to the dyadic
    /// grid. For `f64`, any sum of snapped values below 512 in magnitude is
    /// exactly representable.
    const GRID_BITS: i32;

    /// True when arithmetic on this type never rounds.
    const EXACT: bool;

    fn from_real(x: f64) -> Self;

    fn to_real(self) -> f64;

    /// Snap a continuous draw onto the `2^-GRID_BITS` grid. Never returns
    /// zero for a non-zero input.
    fn snap(x: f64) -> Self {
        let scale = (2.0f64).powi(Self::GRID_BITS);
        let mut q = (x * scale).round();
        if q == 0.0 && x != 0.0 {
            q = x.signum();
        }
        Self::from_real(q / scale)
    }
}

impl Scalar for f64 {
    const GRID_BITS: i32 = 44;
    const EXACT: bool = false;

    fn from_real(x: f64) -> Self {
        x
    }

    fn to_real(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const GRID_BITS: i32 = 12;
    const EXACT: bool = false;

    fn from_real(x: f64) -> Self {
        x as f32
    }

    fn to_real(self) -> f64 {
        self as f64
    }
}

impl Scalar for Rational64 {
    // Keeps numerators of sums and unit-weight products well inside i64.
    const GRID_BITS: i32 = 24;
    const EXACT: bool = true;

    fn from_real(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() < 9.0e15 {
            return Rational64::from_integer(x as i64);
        }
        // Dyadic inputs are reproduced exactly; anything else is approximated.
        let mut den: i64 = 1;
        let mut scaled = x;
        while scaled.fract() != 0.0 && den < (1i64 << 40) {
            scaled *= 2.0;
            den *= 2;
        }
        if scaled.fract() == 0.0 {
            Rational64::new(scaled as i64, den)
        } else {
            <Rational64 as FromPrimitive>::from_f64(x).expect("finite value")
        }
    }

    fn to_real(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

/// Comparison tolerances used by the verification rules.
///
/// A zero `zero_rel`/`eq_rel` means exact comparison. With unit weights and
/// grid-snapped signal values every residual is computed without rounding,
/// so [`Tolerances::exact`] is sound for floats as well as rationals.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Residual `r` counts as zero when `|r| <= zero_rel * (1 + scale)`,
    /// where `scale` is the largest initial measurement magnitude.
    pub zero_rel: f64,
    /// Two residuals are equal when `|a - b| <= eq_rel * max(|a|, |b|)`.
    pub eq_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_rel: 1e-9,
            eq_rel: 1e-9,
        }
    }
}

impl Tolerances {
    pub const fn exact() -> Self {
        Tolerances {
            zero_rel: 0.0,
            eq_rel: 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.zero_rel == 0.0 && self.eq_rel == 0.0
    }

    pub(crate) fn is_zero<T: Scalar>(&self, x: T, scale: f64) -> bool {
        if self.zero_rel == 0.0 {
            x.is_zero()
        } else {
            x.abs().to_real() <= self.zero_rel * (1.0 + scale)
        }
    }

    pub(crate) fn approx_eq<T: Scalar>(&self, a: T, b: T) -> bool {
        if self.eq_rel == 0.0 {
            a == b
        } else {
            let (fa, fb) = (a.to_real(), b.to_real());
            (fa - fb).abs() <= self.eq_rel * fa.abs().max(fb.abs())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_keeps_sign_and_nonzero() {
        assert!(<f64 as Scalar>::snap(1e-300) > 0.0);
        assert!(<f64 as Scalar>::snap(-1e-300) < 0.0);
        assert_eq!(<f64 as Scalar>::snap(0.0), 0.0);
        let x = <f64 as Scalar>::snap(0.123456789);
        assert!((x - 0.123456789).abs() < 1e-11);
    }

    #[test]
    fn snapped_sums_are_exact_in_f64() {
        let xs: Vec<f64> = [0.7072, -1.3, 2.25, 0.333333, -0.1]
            .iter()
            .map(|&x| <f64 as Scalar>::snap(x))
            .collect();
        let total: f64 = xs.iter().sum();
        let mut residual = total;
        for &x in &xs[..4] {
            residual -= x;
        }
        assert_eq!(residual, xs[4]);
    }

    #[test]
    fn rational_roundtrip_of_dyadic_values() {
        let x = <f64 as Scalar>::snap(-0.8125);
        let r = <Rational64 as Scalar>::from_real(x);
        assert_eq!(Scalar::to_real(r), x);
        let y = <Rational64 as Scalar>::snap(1.0 / 3.0);
        assert_eq!(*y.denom() & (*y.denom() - 1), 0, "power-of-two denominator");
    }

    #[test]
    fn tolerance_modes() {
        let exact = Tolerances::exact();
        assert!(exact.is_zero(0.0f64, 10.0));
        assert!(!exact.is_zero(1e-300f64, 10.0));
        assert!(!exact.approx_eq(1.0f64, 1.0 + f64::EPSILON));
        let loose = Tolerances::default();
        assert!(loose.is_zero(1e-10f64, 1.0));
        assert!(loose.approx_eq(1.0f64, 1.0 + 1e-12));
        assert!(!loose.approx_eq(1.0f64, 1.0 + 1e-6));
    }
}
