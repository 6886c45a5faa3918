//! Numerical check of operator-derived orderings.
//!
//! For every pair `l ⪯ k` in the closure, a sound ordering needs
//! `m_l <= m_k` for GA means and `Z_k <= Z_l` for BEC Bhattacharyya
//! parameters at every grid point.

use num_bigint::BigInt;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bec::bhattacharyya;
use crate::error::Result;
use crate::ga::{evolve, ChannelParam};
use crate::order::{max_order_at, PosetRelation};

/// 20 noise variances evenly spaced over `[0.2, 4.0]`.
pub fn sigma2_grid() -> Vec<f64> {
    (0..20).map(|i| 0.2 + 3.8 * i as f64 / 19.0).collect()
}

/// 20 erasure probabilities `i / 21`, strictly inside `(0, 1)`.
pub fn epsilon_grid() -> Vec<(i64, i64)> {
    (1..=20).map(|i| (i, 21)).collect()
}

/// One ordered pair the numbers disagree with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub lower: u64,
    pub upper: u64,
    /// `sigma^2` for GA or erasure probability for BEC.
    pub parameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub n: u32,
    pub max_order: u32,
    pub ordered_pairs: u64,
    pub ga_violations: u64,
    pub bec_violations: u64,
    /// Violations under exact rational BEC arithmetic, when that sweep was run.
    pub bec_exact_violations: Option<u64>,
    pub first_violation: Option<Violation>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.ga_violations == 0 && self.bec_violations == 0 && self.bec_exact_violations.unwrap_or(0) == 0
    }
}

/// Counts pairs `l ≺ k` for which `bad(l, k)` holds; returns the count and the first such pair.
fn scan<F: Fn(usize, usize) -> bool>(rel: &PosetRelation, bad: F) -> (u64, Option<(u64, u64)>) {
    let mut count = 0;
    let mut first = None;
    for k in 0..rel.size() {
        for l in rel.down_set(k as u64).ones() {
            if l != k && bad(l, k) {
                count += 1;
                first.get_or_insert((l as u64, k as u64));
            }
        }
    }
    (count, first)
}

/// Sweep at depth `n` with operators up to `max_order` (defaults to all available).
///
/// `exact_bec` additionally repeats the BEC sweep in rational arithmetic.
pub fn soundness_sweep(n: u32, max_order: Option<u32>, exact_bec: bool) -> Result<SoundnessReport> {
    let max_order = max_order.unwrap_or_else(|| max_order_at(n).max(1));
    let rel = PosetRelation::build(n, max_order)?;

    let ga: Vec<(u64, Option<Violation>)> = sigma2_grid()
        .into_par_iter()
        .map(|s2| -> Result<_> {
            let means = evolve(n, ChannelParam::new(s2)?);
            let m = means.means();
            let (c, first) = scan(&rel, |l, k| m[l] > m[k]);
            Ok((c, first.map(|(lower, upper)| Violation { lower, upper, parameter: s2 })))
        })
        .collect::<Result<_>>()?;

    let bec: Vec<(u64, Option<Violation>)> = epsilon_grid()
        .into_par_iter()
        .map(|(a, b)| {
            let eps = a as f64 / b as f64;
            let z = bhattacharyya(n, eps);
            let (c, first) = scan(&rel, |l, k| z[k] > z[l]);
            (c, first.map(|(lower, upper)| Violation { lower, upper, parameter: eps }))
        })
        .collect();

    let bec_exact_violations = exact_bec.then(|| {
        epsilon_grid()
            .into_par_iter()
            .map(|(a, b)| {
                let z = bhattacharyya(n, Ratio::new(BigInt::from(a), BigInt::from(b)));
                scan(&rel, |l, k| z[k] > z[l]).0
            })
            .sum()
    });

    let first_violation = ga.iter().chain(&bec).find_map(|(_, v)| v.clone());
    Ok(SoundnessReport {
        n,
        max_order,
        ordered_pairs: rel.comparable_pairs(),
        ga_violations: ga.iter().map(|(c, _)| c).sum(),
        bec_violations: bec.iter().map(|(c, _)| c).sum(),
        bec_exact_violations,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let s = sigma2_grid();
        assert_eq!(s.len(), 20);
        assert_eq!(s[0], 0.2);
        assert!((s[19] - 4.0).abs() < 1e-15);
        assert_eq!(epsilon_grid().len(), 20);
    }

    #[test]
    fn small_depths_clean() {
        for n in 1..=5 {
            let r = soundness_sweep(n, None, true).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.ordered_pairs > 0);
        }
    }

    #[test]
    fn resolution_of_example_pair() {
        // m(0110) >= m(0101) at every grid point.
        for s2 in sigma2_grid() {
            let m = evolve(4, ChannelParam::new(s2).unwrap());
            assert!(m[0b0110] >= m[0b0101]);
        }
    }

    #[test]
    fn detects_a_wrong_measurement() {
        // Forcing 0111 ⪯ 1000 contradicts the numbers; the scan must see it.
        let rel = PosetRelation::build(4, 2)
            .unwrap()
            .augment_with_measurement(&[(0b0111, 0b1000)])
            .unwrap();
        let m = evolve(4, ChannelParam::new(1.0).unwrap());
        let (c, _) = scan(&rel, |l, k| m[l] > m[k]);
        assert!(c > 0);
    }
}
