//! Scalar abstraction shared by the numeric modules.
//!
//! Everything that does floating-point work (density evolution, the SC
//! decoder, the Bhattacharyya recursion) is written against [`Real`], which
//! is implemented for `f32` and `f64`. The error-function family is evaluated
//! in double precision and rounded to the target type: forward functions via
//! `libm`, inverses via `statrs` polished by one Newton step against `libm`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar with the error-function family attached.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    fn erf(self) -> Self;
    fn erfc(self) -> Self;
    /// Inverse of `erf` on (-1, 1).
    fn erf_inv(self) -> Self;
    /// Inverse of `erfc` on (0, 2).
    fn erfc_inv(self) -> Self;
    /// `ln(erfc(x))`, finite even where `erfc(x)` underflows.
    fn ln_erfc(self) -> Self;
    /// Inverse of [`Real::ln_erfc`]: the `w >= 0` with `ln erfc(w) = self`, for `self <= 0`.
    fn ln_erfc_inv(self) -> Self;

    /// Lossless-enough conversion from `f64` literals.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f64 {
    fn erf(self) -> f64 {
        libm::erf(self)
    }

    fn erfc(self) -> f64 {
        libm::erfc(self)
    }

    fn erf_inv(self) -> f64 {
        erf_inv_f64(self)
    }

    fn erfc_inv(self) -> f64 {
        erfc_inv_f64(self)
    }

    fn ln_erfc(self) -> f64 {
        ln_erfc_f64(self)
    }

    fn ln_erfc_inv(self) -> f64 {
        ln_erfc_inv_f64(self)
    }
}

impl Real for f32 {
    fn erf(self) -> f32 {
        libm::erf(self as f64) as f32
    }

    fn erfc(self) -> f32 {
        libm::erfc(self as f64) as f32
    }

    fn erf_inv(self) -> f32 {
        erf_inv_f64(self as f64) as f32
    }

    fn erfc_inv(self) -> f32 {
        erfc_inv_f64(self as f64) as f32
    }

    fn ln_erfc(self) -> f32 {
        ln_erfc_f64(self as f64) as f32
    }

    fn ln_erfc_inv(self) -> f32 {
        ln_erfc_inv_f64(self as f64) as f32
    }
}

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

fn erf_inv_f64(y: f64) -> f64 {
    let w = statrs::function::erf::erf_inv(y);
    if !w.is_finite() {
        return w;
    }
    w - (libm::erf(w) - y) / (TWO_OVER_SQRT_PI * (-w * w).exp())
}

fn erfc_inv_f64(y: f64) -> f64 {
    let w = statrs::function::erf::erfc_inv(y);
    let slope = TWO_OVER_SQRT_PI * (-w * w).exp();
    if !w.is_finite() || slope == 0.0 {
        return w;
    }
    w + (libm::erfc(w) - y) / slope
}

/// Beyond this argument erfc is evaluated through the scaled asymptotic series.
const ASYMPTOTIC_FROM: f64 = 20.0;

/// `ln(erfcx(x))` for large `x`, where `erfcx(x) = exp(x^2) erfc(x)`.
///
/// Asymptotic series `1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k`; at
/// `x >= 20` twelve terms are far below double-precision resolution.
fn ln_erfcx_asymptotic(x: f64) -> f64 {
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= -((2 * k - 1) as f64) * inv2x2;
        sum += term;
    }
    sum.ln() - x.ln() - 0.5 * std::f64::consts::PI.ln()
}

fn ln_erfc_f64(x: f64) -> f64 {
    if x < ASYMPTOTIC_FROM {
        libm::erfc(x).ln()
    } else {
        ln_erfcx_asymptotic(x) - x * x
    }
}

fn ln_erfc_inv_f64(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    // erfc(20) ~ 5.4e-176 is still a normal double, so the direct inverse is
    // accurate above that level.
    if target > -400.0 {
        return erfc_inv_f64(target.exp());
    }
    // Newton on g(w) = ln erfc(w) - target; g'(w) = -2 exp(-w^2) / (sqrt(pi) erfc(w)).
    let mut w = (-target).sqrt();
    for _ in 0..60 {
        let g = ln_erfc_f64(w) - target;
        let dg = -2.0 / std::f64::consts::PI.sqrt() * (-(w * w) - ln_erfc_f64(w)).exp();
        let step = g / dg;
        w -= step;
        if step.abs() <= 1e-15 * w {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_erfc_matches_direct_below_switch() {
        for &x in &[0.0, 0.5, 3.0, 10.0, 19.9] {
            let direct = libm::erfc(x).ln();
            assert!((ln_erfc_f64(x) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn ln_erfc_continuous_at_switch() {
        let below = libm::erfc(20.0).ln();
        let above = ln_erfcx_asymptotic(20.0) - 400.0;
        assert!((below - above).abs() < 1e-12 * below.abs());
    }

    #[test]
    fn ln_erfc_inv_round_trips_deep_tail() {
        for &w in &[0.3, 4.0, 25.0, 60.0, 200.0] {
            let l = ln_erfc_f64(w);
            let back = ln_erfc_inv_f64(l);
            assert!((back - w).abs() < 1e-11 * w, "w={w} back={back}");
        }
    }

    #[test]
    fn reference_values() {
        // 40-digit mpmath: erfc(sqrt(pi)/2), erf(1/2).
        let a = Real::erfc(std::f64::consts::PI.sqrt() / 2.0);
        assert!((a / 0.210_091_405_443_937_275_371_190_145_6 - 1.0).abs() < 1e-15);
        let b = Real::erf(0.5f64);
        assert!((b / 0.520_499_877_813_046_537_682_746_653_9 - 1.0).abs() < 1e-15);
        for &y in &[1e-200, 1e-9, 0.3, 1.0, 1.7] {
            // One ulp in w moves erfc(w) by a relative 2 w^2 ulp.
            let w = erfc_inv_f64(y);
            let tol = 1e-15 * (2.0 * w * w).max(4.0);
            assert!((libm::erfc(w) / y - 1.0).abs() < tol, "y={y}");
        }
        for &y in &[-0.9, 0.01, 0.5, 0.999] {
            assert!((libm::erf(erf_inv_f64(y)) / y - 1.0).abs() < 1e-14, "y={y}");
        }
    }

    #[test]
    fn f32_follows_f64() {
        let x = 0.7f32;
        assert!((Real::erfc(x) as f64 - Real::erfc(0.7f64)).abs() < 1e-7);
        assert!((Real::erfc_inv(0.25f32) as f64 - Real::erfc_inv(0.25f64)).abs() < 1e-6);
    }
}
