//! The original Gaussian-approximation transfer function, by quadrature.
//!
//! `phi(x) = 1 - E[tanh(u/2)]` with `u ~ N(x, 2x)`. Evaluated literally the
//! expectation cancels catastrophically for large `x`, so two equivalent
//! positive-integrand forms are used instead:
//!
//! ```text
//! phi(x)     = 2/sqrt(pi x) e^{-x/4} ∫_0^∞ e^{-u/2 - u²/(4x)} / (1 + e^{-u}) du
//! 1 - phi(x) = 1/sqrt(4 pi x)        ∫_0^∞ tanh(u/2) e^{-(u-x)²/(4x)} (1 - e^{-u}) du
//! ```
//!
//! Both follow from folding the integral at `u = 0` and using
//! `1 - tanh(u/2) = 2/(1 + e^u)`. [`phi_literal`] keeps the textbook form as a
//! second route for cross-checking.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

const REL_TOL: f64 = 1e-12;

fn check_domain(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain { value: x, domain: "0 <= x < inf" });
    }
    Ok(())
}

/// `ln phi(x)`, finite for every `x >= 0`.
pub fn ln_phi(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let upper = (40.0 * x.sqrt()).min(160.0);
    let scaled = integrate(
        |u| (-0.5 * u - u * u / (4.0 * x)).exp() / (1.0 + (-u).exp()),
        0.0,
        upper,
        &[upper.min(2.0 * x.sqrt())],
        1e-300,
        REL_TOL,
    )?;
    Ok(std::f64::consts::LN_2 - 0.5 * (PI * x).ln() - 0.25 * x + scaled.value.ln())
}

/// `phi(x)` by quadrature; `phi(0) = 1`.
pub fn phi(x: f64) -> Result<f64> {
    Ok(ln_phi(x)?.exp())
}

/// `1 - phi(x) = E[tanh(u/2)]`, without cancellation for small `x`.
pub fn complement(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let s = x.sqrt();
    let lo = (x - 40.0 * s).max(0.0);
    let hi = x + 40.0 * s + 40.0;
    // The Gaussian factor has width sqrt(2x); break on that scale so the
    // first pass cannot step over it when x is small.
    let w = (2.0 * x).sqrt();
    let breaks = [x, x + w, x + 4.0 * w, x + 16.0 * w, x - w, x - 4.0 * w];
    let r = integrate(
        |u| {
            let g = (-(u - x) * (u - x) / (4.0 * x)).exp();
            (0.5 * u).tanh() * g * -(-u).exp_m1()
        },
        lo,
        hi,
        &breaks,
        1e-300,
        REL_TOL,
    )?;
    Ok(r.value / (4.0 * PI * x).sqrt())
}

/// Textbook form `1 - (4 pi x)^{-1/2} ∫ tanh(u/2) e^{-(u-x)²/(4x)} du` over
/// `x ± 12 sqrt(2x)`. Absolute accuracy only; for cross-checks.
pub fn phi_literal(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    let half_width = 12.0 * (2.0 * x).sqrt();
    let r = integrate(
        |u| (0.5 * u).tanh() * (-(u - x) * (u - x) / (4.0 * x)).exp(),
        x - half_width,
        x + half_width,
        &[0.0, x],
        1e-14,
        1e-14,
    )?;
    Ok(1.0 - r.value / (4.0 * PI * x).sqrt())
}

/// Root of a monotone function by bracketing and the Illinois variant of
/// regula falsi, both carried out in `u = ln x`.
fn solve_monotone<F: Fn(f64) -> Result<f64>>(f: F, target: f64, guess: f64) -> Result<f64> {
    const U_MIN: f64 = -690.0;
    const U_MAX: f64 = 700.0;
    let g = |u: f64| -> Result<f64> { Ok(f(u.exp())? - target) };
    let u0 = guess.max(1e-300).ln().clamp(U_MIN, U_MAX);
    let g0 = g(u0)?;
    if g0 == 0.0 {
        return Ok(u0.exp());
    }
    // Step away from the guess in both directions until the sign changes.
    let (mut a, mut ga, mut b, mut gb) = (u0, g0, u0, g0);
    let mut step = 0.05;
    loop {
        let (lo, hi) = ((a - step).max(U_MIN), (b + step).min(U_MAX));
        let (glo, ghi) = (g(lo)?, g(hi)?);
        if glo.signum() != g0.signum() {
            (b, gb) = (a, ga);
            (a, ga) = (lo, glo);
            break;
        }
        if ghi.signum() != g0.signum() {
            (a, ga) = (b, gb);
            (b, gb) = (hi, ghi);
            break;
        }
        if lo == U_MIN && hi == U_MAX {
            return Err(Error::Quadrature { x: target, estimate: f64::NAN });
        }
        (a, ga, b, gb) = (lo, glo, hi, ghi);
        step *= 2.0;
    }
    let mut side = 0i8;
    let mut c = a;
    for _ in 0..200 {
        c = (a * gb - b * ga) / (gb - ga);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c)?;
        if gc == 0.0 || (b - a).abs() <= 1e-15 * (1.0 + c.abs()) {
            break;
        }
        if gc.signum() == gb.signum() {
            (b, gb) = (c, gc);
            if side == -1 {
                ga /= 2.0;
            }
            side = -1;
        } else {
            (a, ga) = (c, gc);
            if side == 1 {
                gb /= 2.0;
            }
            side = 1;
        }
    }
    Ok(c.exp())
}

/// Inverse of [`phi`] on `(0, 1]`.
pub fn phi_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain { value: y, domain: "0 < y <= 1" });
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    if y > 0.5 {
        return inv_from_complement(1.0 - y);
    }
    let guess = super::phi_inv(y)?.max(1e-12);
    solve_monotone(ln_phi, y.ln(), guess)
}

/// The `x` with `1 - phi(x) = c`, for small `c`.
fn inv_from_complement(c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Ok(0.0);
    }
    // Simplified form: 1 - phi(x) = erf(sqrt(x)/2).
    let w = crate::scalar::Real::erf_inv(c.min(0.999_999));
    let guess = (4.0 * w * w).max(1e-300);
    solve_monotone(|x| complement(x).map(f64::ln), c.ln(), guess)
}

/// Minus-branch update with the quadrature transfer function.
pub fn minus_update(m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Ok(0.0);
    }
    let t = complement(m)?;
    // 1 - (1 - phi)^2 = 1 - t^2; invert through whichever side is small.
    let c = t * t;
    if c <= 0.5 {
        return inv_from_complement(c);
    }
    let ln_p = ln_phi(m)?;
    let ln_y = ln_p + (2.0 - ln_p.exp()).ln();
    let guess = super::minus_update(m).max(1e-12);
    solve_monotone(ln_phi, ln_y, guess)
}

/// Density evolution with the quadrature transfer function.
pub fn evolve(n: u32, param: super::ChannelParam<f64>) -> Result<super::LlrMeanVector<f64>> {
    let means = super::evolve_with(n, param.m0(), |m| minus_update(m).unwrap_or(f64::NAN));
    if let Some(&bad) = means.means().iter().find(|m| m.is_nan()) {
        return Err(Error::Quadrature { x: param.m0(), estimate: bad });
    }
    Ok(means)
}
