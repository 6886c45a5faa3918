//! Shape of the minus-branch map against the line `y = x/2`.

use serde::{Deserialize, Serialize};

use super::minus_update;

/// Tolerance for the fixed point at `(pi, pi/2)`.
pub const FIXED_POINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    /// `minus_update(0)`, expected exactly 0.
    pub origin_value: f64,
    /// `|minus_update(pi) - pi/2|`.
    pub fixed_point_deviation: f64,
    /// Where `minus_update(x) = x/2` actually crosses near pi.
    pub crossing: f64,
    /// Largest `minus_update(x) - x/2` over the grid in `(0, pi)`; negative when the map stays below.
    pub below_worst_margin: f64,
    pub below_worst_x: f64,
    /// Smallest `minus_update(x) - x/2` over sampled `x` in `(pi, 40]`; positive when above.
    pub above_worst_margin: f64,
    pub above_worst_x: f64,
    pub origin_ok: bool,
    pub fixed_point_ok: bool,
    pub below_ok: bool,
    pub above_ok: bool,
}

impl GeometryReport {
    pub fn passed(&self) -> bool {
        self.origin_ok && self.fixed_point_ok && self.below_ok && self.above_ok
    }

    /// The inequalities the attractor argument relies on (origin, below, above).
    pub fn ordering_holds(&self) -> bool {
        self.origin_ok && self.below_ok && self.above_ok
    }
}

/// Root of `minus_update(x) - x/2` in `[lo, hi]` by bisection.
pub fn minus_crossing(lo: f64, hi: f64) -> f64 {
    let h = |x: f64| minus_update(x) - 0.5 * x;
    let (mut a, mut b) = (lo, hi);
    let ha = h(a);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        if h(c).signum() == ha.signum() {
            a = c;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

/// Checks the three geometric observations on fixed grids; failures are reported, not thrown.
pub fn geometry_check() -> GeometryReport {
    use std::f64::consts::{FRAC_PI_2, PI};

    let origin_value = minus_update(0.0f64);
    let fixed_point_deviation = (minus_update(PI) - FRAC_PI_2).abs();

    let (lo, hi, points) = (0.005, PI - 0.005, 1000);
    let (mut below_worst_margin, mut below_worst_x) = (f64::NEG_INFINITY, lo);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let margin = minus_update(x) - 0.5 * x;
        if margin > below_worst_margin {
            below_worst_margin = margin;
            below_worst_x = x;
        }
    }

    let (mut above_worst_margin, mut above_worst_x) = (f64::INFINITY, PI);
    for i in 1..=points {
        let x = PI + (40.0 - PI) * i as f64 / points as f64;
        let margin = minus_update(x) - 0.5 * x;
        if margin < above_worst_margin {
            above_worst_margin = margin;
            above_worst_x = x;
        }
    }

    GeometryReport {
        origin_value,
        fixed_point_deviation,
        crossing: minus_crossing(2.5, 4.0),
        below_worst_margin,
        below_worst_x,
        above_worst_margin,
        above_worst_x,
        origin_ok: origin_value == 0.0,
        fixed_point_ok: fixed_point_deviation < FIXED_POINT_TOL,
        below_ok: below_worst_margin < 0.0,
        above_ok: above_worst_margin > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_points() {
        assert!(minus_update(1.0f64) < 0.5);
        assert_eq!(minus_update(0.0f64), 0.0);
    }

    #[test]
    fn crossing_location() {
        // Pinned with 40-digit mpmath: 3.155840279796675...
        let c = minus_crossing(2.5, 4.0);
        assert!((c - 3.155_840_279_796_675).abs() < 1e-9, "{c}");
    }

    #[test]
    fn report_parts() {
        let r = geometry_check();
        assert!(r.origin_ok && r.below_ok && r.above_ok);
        // The simplified map misses (pi, pi/2) by 3.6096e-3.
        assert!((r.fixed_point_deviation - 3.609_617_359_135_748e-3).abs() < 1e-9);
    }
}
