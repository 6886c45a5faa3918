//! Gaussian-approximation density evolution.
//!
//! Each synthetic channel is summarized by the mean of its LLR. Starting from
//! `m0 = 2 / sigma^2` for BPSK over AWGN, one polarization step maps a mean
//! `m` to `minus_update(m)` for the bad child and `2 m` for the good child.
//! The simplified transfer function is `phi(x) = erfc(sqrt(x) / 2)` with
//! inverse `4 erfcinv(y)^2`; [`chung`] keeps the original integral form as an
//! independent oracle.

pub mod chung;
mod geometry;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::ChannelIndex;
use crate::scalar::Real;

pub use geometry::{geometry_check, minus_crossing, GeometryReport};

/// BPSK/AWGN channel described by its noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParam<T> {
    sigma2: T,
    m0: T,
}

impl<T: Real> ChannelParam<T> {
    pub fn new(sigma2: T) -> Result<Self> {
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::Domain {
                value: sigma2.to_f64().unwrap_or(f64::NAN),
                domain: "sigma2 > 0",
            });
        }
        Ok(Self { sigma2, m0: T::of(2.0) / sigma2 })
    }

    /// `sigma^2 = 1 / (2 R 10^{EbN0/10})`, `Eb` scaled by the code rate.
    pub fn from_ebn0_db(ebn0_db: T, rate: T) -> Result<Self> {
        let linear = T::of(10.0).powf(ebn0_db / T::of(10.0));
        Self::new(T::one() / (T::of(2.0) * rate * linear))
    }

    /// `sigma^2 = 1 / (2 * 10^{EsN0/10})` for unit-energy symbols.
    pub fn from_esn0_db(esn0_db: T) -> Result<Self> {
        Self::from_ebn0_db(esn0_db, T::one())
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    /// Mean channel LLR, `2 / sigma^2`.
    pub fn m0(&self) -> T {
        self.m0
    }

    /// LLR variance `4 / sigma^2` (twice the mean, the consistency condition).
    pub fn llr_variance(&self) -> T {
        T::of(4.0) / self.sigma2
    }
}

/// `phi(x) = erfc(sqrt(x) / 2)`.
pub fn phi<T: Real>(x: T) -> T {
    (x.max(T::zero()).sqrt() / T::of(2.0)).erfc()
}

/// `phi^{-1}(y) = 4 erfcinv(y)^2` for `0 < y <= 1`.
pub fn phi_inv<T: Real>(y: T) -> Result<T> {
    if !(y > T::zero() && y <= T::one()) {
        return Err(Error::Domain {
            value: y.to_f64().unwrap_or(f64::NAN),
            domain: "0 < y <= 1",
        });
    }
    let w = y.erfc_inv();
    Ok(T::of(4.0) * w * w)
}

/// Mean LLR of the good child: exactly `2 m`.
pub fn plus_update<T: Real>(m: T) -> T {
    m + m
}

/// Mean LLR of the bad child: `phi^{-1}(1 - (1 - phi(m))^2)`.
///
/// With `z = sqrt(m)/2` the inner quantity is `1 - erf(z)^2 = erfc(z) (2 - erfc(z))`.
/// The first form is used while `erf(z)^2` is small (inverting through `erf_inv`
/// avoids cancellation near `y = 1`), the second otherwise, switching to the
/// log domain once `erfc(z)` leaves the normal range.
pub fn minus_update<T: Real>(m: T) -> T {
    if !(m > T::zero()) {
        return T::zero();
    }
    let four = T::of(4.0);
    let z = m.sqrt() / T::of(2.0);
    let e = z.erf();
    let s = e * e;
    if s < T::of(0.5) {
        let w = s.erf_inv();
        return four * w * w;
    }
    let p = Real::erfc(z.to_f64().expect("finite"));
    if p > 1e-280 {
        let w = T::of(p * (2.0 - p)).erfc_inv();
        return four * w * w;
    }
    let ln_y = std::f64::consts::LN_2 + z.to_f64().expect("finite").ln_erfc();
    let w = ln_y.ln_erfc_inv();
    T::of(4.0 * w * w)
}

/// Bit error probability of a channel with mean LLR `m`: `erfc(sqrt(m)/2) / 2`.
pub fn error_prob<T: Real>(m: T) -> T {
    phi(m) / T::of(2.0)
}

/// Which transfer function drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaMethod {
    Simplified,
    Chung,
}

impl GaMethod {
    pub fn name(&self) -> &'static str {
        match self {
            GaMethod::Simplified => "simplified",
            GaMethod::Chung => "chung",
        }
    }
}

impl std::str::FromStr for GaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplified" => Ok(GaMethod::Simplified),
            "chung" => Ok(GaMethod::Chung),
            other => Err(Error::InvalidSpec(format!("unknown GA method {other:?}"))),
        }
    }
}

/// Mean LLR of every synthetic channel at depth `n`, position `k` = index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrMeanVector<T> {
    n: u32,
    means: Vec<T>,
}

impl<T: Real> LlrMeanVector<T> {
    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<T> {
        self.means.get(k).copied()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.means
    }
}

impl<T> std::ops::Index<usize> for LlrMeanVector<T> {
    type Output = T;

    fn index(&self, k: usize) -> &T {
        &self.means[k]
    }
}

/// Levels at least this wide are split across the rayon pool.
const PARALLEL_LEVEL: usize = 4096;

/// Density evolution with the simplified transfer function.
pub fn evolve<T: Real>(n: u32, param: ChannelParam<T>) -> LlrMeanVector<T> {
    evolve_with(n, param.m0(), minus_update::<T>)
}

/// Density evolution with an arbitrary minus-branch update.
///
/// Level by level: parent `p` produces child `2p` (minus, bit 0) and `2p + 1`
/// (plus, bit 1), so after `n` levels position `k` holds the channel whose
/// MSB-first expansion is `k`. Each entry depends only on its own chain, so
/// the parallel split does not change any value.
pub fn evolve_with<T, F>(n: u32, m0: T, minus: F) -> LlrMeanVector<T>
where
    T: Real,
    F: Fn(T) -> T + Sync,
{
    let mut level = vec![m0];
    for _ in 0..n {
        let mut next = vec![T::zero(); level.len() * 2];
        let fill = |(pair, &m): (&mut [T], &T)| {
            pair[0] = minus(m);
            pair[1] = plus_update(m);
        };
        if level.len() >= PARALLEL_LEVEL {
            next.par_chunks_mut(2).zip(level.par_iter()).for_each(fill);
        } else {
            next.chunks_mut(2).zip(level.iter()).for_each(fill);
        }
        level = next;
    }
    LlrMeanVector { n, means: level }
}

/// Mean LLR of a single channel, folding its sign sequence from the first step.
pub fn chain_mean<T: Real>(index: ChannelIndex, m0: T) -> T {
    index.bits().into_iter().fold(m0, |m, b| {
        if b == 1 {
            plus_update(m)
        } else {
            minus_update(m)
        }
    })
}

/// Sum of `error_prob` over the information set.
pub fn union_bound<T: Real>(means: &LlrMeanVector<T>, info: &[u64]) -> Result<T> {
    let mut total = T::zero();
    for &i in info {
        let m = means.get(i as usize).ok_or(Error::IndexOutOfRange { index: i, n: means.n })?;
        total = total + error_prob(m);
    }
    Ok(total)
}

/// One row of a reliability dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityRow {
    pub index: u64,
    pub bits: String,
    pub mean_llr: f64,
    pub error_prob: f64,
}

/// JSON reliability dump with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityFile {
    pub n: u32,
    pub sigma2: f64,
    pub method: GaMethod,
    pub channels: Vec<ReliabilityRow>,
}

pub fn reliability_rows<T: Real>(means: &LlrMeanVector<T>) -> Vec<ReliabilityRow> {
    means
        .means()
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let idx = ChannelIndex::new(means.depth(), k as u64).expect("position within 2^n");
            ReliabilityRow {
                index: k as u64,
                bits: idx.to_string(),
                mean_llr: m.to_f64().unwrap_or(f64::NAN),
                error_prob: error_prob(m).to_f64().unwrap_or(f64::NAN),
            }
        })
        .collect()
}

/// CSV with header `index,bits,mean_llr,error_prob`.
pub fn reliability_csv(rows: &[ReliabilityRow]) -> String {
    let mut out = String::from("index,bits,mean_llr,error_prob\n");
    for r in rows {
        out.push_str(&format!("{},{},{:e},{:e}\n", r.index, r.bits, r.mean_llr, r.error_prob));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Reference values computed with 40-digit mpmath.
    const PHI_PI: f64 = 0.210_091_405_443_937_275_371_190_145_636_487_578_850_3;
    const PHI_INV_HALF: f64 = 0.909_872_846_239_145_503_885_033_293_959_298_792_632_8;
    const ERRP_36: f64 = 0.000_011_045_248_499_292_720_686_388_064_791_160_189_923_85;
    const MINUS_1: f64 = 0.239_916_311_923_570_714_117_159_166_554_729_931_195_8;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0f64), 1.0);
        assert!(rel(phi(PI), PHI_PI) < 1e-13);
        let p40 = phi(40.0f64);
        assert!(p40 > 0.0 && p40 < 1e-5);
        assert!(p40 < (-10.0f64).exp());
    }

    #[test]
    fn phi_inverse() {
        assert_eq!(phi_inv(1.0f64).unwrap(), 0.0);
        assert!(rel(phi_inv(phi(2.5f64)).unwrap(), 2.5) < 1e-10);
        assert!(rel(phi_inv(0.5f64).unwrap(), PHI_INV_HALF) < 1e-13);
        assert!(phi_inv(0.0f64).is_err());
        assert!(phi_inv(1.5f64).is_err());
        let mut y = 1e-12f64;
        while y <= 1.0 {
            assert!(rel(phi(phi_inv(y).unwrap()), y) < 1e-10, "y={y}");
            y *= 1.7;
        }
    }

    #[test]
    fn updates() {
        assert_eq!(plus_update(3.7f64), 7.4);
        assert_eq!(minus_update(0.0f64), 0.0);
        assert!(rel(minus_update(1.0f64), MINUS_1) < 1e-12);
    }

    #[test]
    fn minus_update_branches_join() {
        // Around the erf^2 = 1/2 switch (z ~ 0.9539, m ~ 3.64) both forms must agree.
        for &m in &[3.55f64, 3.63, 3.64, 3.65, 3.8] {
            let z = m.sqrt() / 2.0;
            let e = Real::erf(z);
            let via_erf = 4.0 * Real::erf_inv(e * e).powi(2);
            let p = Real::erfc(z);
            let via_erfc = 4.0 * Real::erfc_inv(p * (2.0 - p)).powi(2);
            assert!(rel(via_erf, via_erfc) < 1e-12, "m={m}");
            assert!(rel(minus_update(m), via_erf) < 1e-12);
        }
    }

    #[test]
    fn minus_update_log_branch_continuous() {
        // erfc(z) crosses 1e-280 near z = 25.2, m ~ 2540.
        let ms: Vec<f64> = (0..40).map(|i| 2400.0 + 10.0 * i as f64).collect();
        for w in ms.windows(2) {
            let (a, b) = (minus_update(w[0]), minus_update(w[1]));
            assert!(b > a && b - a < 12.0, "{} -> {}", a, b);
        }
        let big = minus_update(1.0e5f64);
        assert!(big < 1.0e5 && big > 1.0e5 - 50.0);
    }

    #[test]
    fn sandwich() {
        let mut m = 1e-6f64;
        while m < 1e4 {
            let lo = minus_update(m);
            assert!(lo < m && m < plus_update(m), "m={m}");
            assert!(lo >= 0.0);
            m *= 1.3;
        }
    }

    #[test]
    fn error_prob_values() {
        assert_eq!(error_prob(0.0f64), 0.5);
        assert!(rel(error_prob(36.0f64), ERRP_36) < 1e-12);
        // m0 = 2/sigma^2 gives the uncoded BPSK bit error Q(1/sigma) = erfc(1/(sigma sqrt 2))/2.
        for &s2 in &[0.3f64, 1.0, 2.5] {
            let p = ChannelParam::new(s2).unwrap();
            let q = 0.5 * Real::erfc(1.0 / (s2.sqrt() * 2f64.sqrt()));
            assert!(rel(error_prob(p.m0()), q) < 1e-14);
        }
    }

    #[test]
    fn channel_param_checks() {
        assert!(ChannelParam::new(0.0f64).is_err());
        assert!(ChannelParam::new(-1.0f64).is_err());
        assert!(ChannelParam::new(f64::NAN).is_err());
        let p = ChannelParam::new(0.5f64).unwrap();
        assert_eq!(p.m0(), 4.0);
        assert_eq!(p.llr_variance(), 8.0);
        let e = ChannelParam::from_ebn0_db(0.0f64, 0.5).unwrap();
        assert!((e.sigma2() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_small() {
        let p0 = evolve(0, ChannelParam::new(0.5f64).unwrap());
        assert_eq!(p0.means(), &[4.0]);
        let v1 = evolve(1, ChannelParam::new(0.5f64).unwrap());
        assert_eq!(v1[1], 8.0);
        let v2 = evolve(2, ChannelParam::new(2.0f64).unwrap());
        let hand = minus_update(minus_update(1.0f64));
        assert_eq!(v2[0], hand);
        assert_eq!(v2[1], plus_update(minus_update(1.0)));
        assert_eq!(v2[2], minus_update(2.0));
        assert_eq!(v2[3], 4.0);
    }

    #[test]
    fn evolve_matches_chain_fold() {
        for n in 0..=8u32 {
            let p = ChannelParam::new(0.8f64).unwrap();
            let v = evolve(n, p);
            assert_eq!(v[(1usize << n) - 1], (1u64 << n) as f64 * p.m0());
            for k in 0..(1u64 << n) {
                let idx = ChannelIndex::new(n, k).unwrap();
                assert_eq!(v[k as usize], chain_mean(idx, p.m0()));
            }
        }
    }

    #[test]
    fn parallel_levels_bit_identical() {
        let p = ChannelParam::new(1.3f64).unwrap();
        let par = evolve(14, p);
        let serial = {
            let mut level = vec![p.m0()];
            for _ in 0..14 {
                level = level.iter().flat_map(|&m| [minus_update(m), plus_update(m)]).collect();
            }
            level
        };
        assert_eq!(par.means(), serial.as_slice());
    }

    #[test]
    fn all_zero_index_shrinks_below_pi() {
        for &m0 in &[0.5f64, 1.5, 3.0] {
            for n in 1..=10 {
                let v = evolve_with(n, m0, minus_update);
                assert!(v[0] < m0 / (1u64 << n) as f64);
            }
        }
    }

    #[test]
    fn f32_evolution_tracks_f64() {
        let a = evolve(6, ChannelParam::new(1.0f32).unwrap());
        let b = evolve(6, ChannelParam::new(1.0f64).unwrap());
        for (x, y) in a.means().iter().zip(b.means()) {
            assert!(((*x as f64) - y).abs() <= 1e-4 * y.max(1e-3));
        }
    }

    #[test]
    fn union_bound_cases() {
        let v = evolve(3, ChannelParam::new(1.0f64).unwrap());
        assert_eq!(union_bound(&v, &[]).unwrap(), 0.0);
        assert_eq!(union_bound(&v, &[7]).unwrap(), error_prob(8.0 * 2.0));
        assert!(union_bound(&v, &[8]).is_err());
    }

    #[test]
    fn csv_dump() {
        let v = evolve(1, ChannelParam::new(1.0f64).unwrap());
        let csv = reliability_csv(&reliability_rows(&v));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,bits,mean_llr,error_prob");
        assert!(lines[2].starts_with("1,1,4e0,"));
    }
}
