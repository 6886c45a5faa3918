//! Frozen-set construction.
//!
//! Three rules are available: full Gaussian approximation, the
//! channel-independent polarization-weight ranking, and an accelerated GA that
//! pre-freezes a provably unreliable set and runs GA only on the rest.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{self, chain_mean, union_bound, ChannelParam, GaMethod};
use crate::index::{attractor_set, AttractorCase, AttractorSpec, ChannelIndex, MAX_DEPTH};
use crate::order::{downward_closure, max_order_at};

/// Largest depth the designers materialize (`2^n` scores in memory).
pub const MAX_DESIGN_DEPTH: u32 = 24;

/// Operator ceiling used by the accelerated design unless set.
pub const DEFAULT_MAX_ORDER: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMethod {
    Ga,
    Pw,
    FastGa,
}

impl DesignMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DesignMethod::Ga => "ga",
            DesignMethod::Pw => "pw",
            DesignMethod::FastGa => "fastga",
        }
    }
}

impl fmt::Display for DesignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(DesignMethod::Ga),
            "pw" => Ok(DesignMethod::Pw),
            "fastga" | "fast-ga" | "fast_ga" => Ok(DesignMethod::FastGa),
            other => Err(Error::InvalidSpec(format!("unknown design method '{other}'"))),
        }
    }
}

/// Which bit carries the smallest exponent in the polarization weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PwAnchor {
    /// `sum beta^j` over set bits, `j = 0` at the least significant bit.
    #[default]
    Lsb0,
    /// `sum beta^i` over set bits, `i = 1` at the most significant bit.
    Msb1,
}

impl PwAnchor {
    pub fn name(&self) -> &'static str {
        match self {
            PwAnchor::Lsb0 => "lsb0",
            PwAnchor::Msb1 => "msb1",
        }
    }
}

impl FromStr for PwAnchor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsb0" => Ok(PwAnchor::Lsb0),
            "msb1" => Ok(PwAnchor::Msb1),
            other => Err(Error::InvalidSpec(format!("unknown pw anchor '{other}'"))),
        }
    }
}

/// Everything needed to reproduce a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub n: u32,
    #[serde(rename = "K")]
    pub k: u64,
    pub method: DesignMethod,
    /// Design noise variance (GA and FastGA).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    /// `beta = 2^beta_exponent` (PW).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_exponent: Option<f64>,
    /// Operator ceiling (FastGA).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<u32>,
    /// Transfer function for GA designs.
    #[serde(default = "default_ga")]
    pub ga: GaMethod,
    #[serde(default)]
    pub pw_anchor: PwAnchor,
    /// FastGA falls back to full GA when the pre-frozen set does not fit.
    #[serde(default = "default_true")]
    pub allow_fallback: bool,
}

fn default_ga() -> GaMethod {
    GaMethod::Simplified
}

fn default_true() -> bool {
    true
}

impl DesignSpec {
    pub fn ga(n: u32, k: u64, sigma2: f64) -> Self {
        Self::base(n, k, DesignMethod::Ga).with_sigma2(sigma2)
    }

    pub fn pw(n: u32, k: u64, beta_exponent: f64) -> Self {
        Self { beta_exponent: Some(beta_exponent), ..Self::base(n, k, DesignMethod::Pw) }
    }

    pub fn fast(n: u32, k: u64, sigma2: f64, max_order: u32) -> Self {
        Self { max_order: Some(max_order), ..Self::base(n, k, DesignMethod::FastGa) }.with_sigma2(sigma2)
    }

    fn base(n: u32, k: u64, method: DesignMethod) -> Self {
        Self {
            n,
            k,
            method,
            sigma2: None,
            beta_exponent: None,
            max_order: None,
            ga: GaMethod::Simplified,
            pw_anchor: PwAnchor::Lsb0,
            allow_fallback: true,
        }
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = Some(sigma2);
        self
    }

    pub fn with_ga(mut self, ga: GaMethod) -> Self {
        self.ga = ga;
        self
    }

    pub fn block_length(&self) -> u64 {
        1u64 << self.n
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.block_length() as f64
    }

    pub fn frozen_count(&self) -> u64 {
        self.block_length() - self.k
    }

    /// Checks the fields the chosen method needs and rejects the ones it ignores.
    pub fn validate(&self) -> Result<()> {
        if self.n > MAX_DESIGN_DEPTH.min(MAX_DEPTH) {
            return Err(Error::TooLarge { n: self.n, limit: MAX_DESIGN_DEPTH });
        }
        if self.k > self.block_length() {
            return Err(Error::InvalidSpec(format!("K = {} exceeds 2^n = {}", self.k, self.block_length())));
        }
        let needs_sigma = matches!(self.method, DesignMethod::Ga | DesignMethod::FastGa);
        match (needs_sigma, self.sigma2) {
            (true, None) => return Err(Error::InvalidSpec(format!("{} design needs sigma2", self.method))),
            (true, Some(s)) if !(s > 0.0) || !s.is_finite() => {
                return Err(Error::InvalidSpec(format!("sigma2 must be positive, got {s}")))
            }
            (false, Some(_)) => return Err(Error::InvalidSpec("sigma2 only applies to GA designs".into())),
            _ => {}
        }
        match (self.method, self.beta_exponent) {
            (DesignMethod::Pw, None) => return Err(Error::InvalidSpec("pw design needs beta_exponent".into())),
            (DesignMethod::Pw, Some(b)) if !(b > 0.0) || !b.is_finite() => {
                return Err(Error::InvalidSpec(format!("beta_exponent must be positive, got {b}")))
            }
            (DesignMethod::Ga | DesignMethod::FastGa, Some(_)) => {
                return Err(Error::InvalidSpec("beta_exponent only applies to pw designs".into()))
            }
            _ => {}
        }
        match (self.method, self.max_order) {
            (DesignMethod::FastGa, Some(o)) if o == 0 || (self.n > 0 && o > max_order_at(self.n)) => {
                return Err(Error::InvalidOrder { order: o, n: self.n })
            }
            (DesignMethod::Ga | DesignMethod::Pw, Some(_)) => {
                return Err(Error::InvalidSpec("max_order only applies to fastga designs".into()))
            }
            _ => {}
        }
        if self.method == DesignMethod::FastGa && self.ga != GaMethod::Simplified {
            return Err(Error::InvalidSpec("fastga uses the simplified transfer function".into()));
        }
        Ok(())
    }
}

/// Which seed set the accelerated design used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FastRegime {
    /// `m0 < pi/2`: no-11 indices, without the alternating `1(01)^j`.
    BelowHalfPi,
    /// `pi/2 <= m0 < pi`: no-11 indices starting with 0.
    BelowPi,
    /// `m0 >= pi`: a run of leading zeros, then any no-11 suffix.
    Prefix,
}

/// Bookkeeping of an accelerated design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastReport {
    pub regime: FastRegime,
    /// Leading zeros forced in the [`FastRegime::Prefix`] regime.
    pub prefix_len: u32,
    pub max_order: u32,
    pub seeds: usize,
    /// Size of the downward closure of the seeds.
    pub pre_frozen: usize,
    pub ga_evaluations: usize,
    pub ga_evaluations_saved: usize,
    pub fallback: bool,
}

/// A frozen/information partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDesign {
    pub spec: DesignSpec,
    /// Sorted ascending, `2^n - K` entries.
    pub frozen: Vec<u64>,
    /// Sorted ascending, `K` entries.
    pub info: Vec<u64>,
    /// Selection score per index (higher is more reliable); `None` where never evaluated.
    pub scores: Vec<Option<f64>>,
    pub fast: Option<FastReport>,
}

impl CodeDesign {
    fn from_ranking(spec: DesignSpec, scores: Vec<Option<f64>>, mut order: Vec<u64>) -> Self {
        let frozen_count = spec.frozen_count() as usize;
        let mut info = order.split_off(frozen_count);
        order.sort_unstable();
        info.sort_unstable();
        Self { spec, frozen: order, info, scores, fast: None }
    }

    pub fn is_frozen_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; 1usize << self.spec.n];
        for &f in &self.frozen {
            mask[f as usize] = true;
        }
        mask
    }
}

/// Indices sorted least reliable first: by score, then by index.
fn rank(scores: &[f64]) -> Vec<u64> {
    let mut order: Vec<u64> = (0..scores.len() as u64).collect();
    order.sort_by(|&a, &b| scores[a as usize].total_cmp(&scores[b as usize]).then(a.cmp(&b)));
    order
}

/// GA mean LLRs for the spec's transfer function.
pub fn ga_means(n: u32, sigma2: f64, method: GaMethod) -> Result<Vec<f64>> {
    let param = ChannelParam::new(sigma2)?;
    Ok(match method {
        GaMethod::Simplified => ga::evolve(n, param).into_inner(),
        GaMethod::Chung => ga::chung::evolve(n, param)?.into_inner(),
    })
}

/// Freezes the `2^n - K` channels with the smallest mean LLR.
pub fn design_ga(spec: &DesignSpec) -> Result<CodeDesign> {
    if spec.method != DesignMethod::Ga {
        return Err(Error::InvalidSpec(format!("design_ga called with method {}", spec.method)));
    }
    spec.validate()?;
    let means = ga_means(spec.n, spec.sigma2.expect("validated"), spec.ga)?;
    let order = rank(&means);
    Ok(CodeDesign::from_ranking(spec.clone(), means.into_iter().map(Some).collect(), order))
}

/// Polarization weight of index `k` at depth `n`.
pub fn pw_score(n: u32, k: u64, beta_exponent: f64, anchor: PwAnchor) -> f64 {
    let beta = 2f64.powf(beta_exponent);
    (0..n)
        .filter(|&j| (k >> j) & 1 == 1)
        .map(|j| match anchor {
            PwAnchor::Lsb0 => beta.powi(j as i32),
            PwAnchor::Msb1 => beta.powi((n - j) as i32),
        })
        .sum()
}

/// Freezes the `2^n - K` channels with the smallest polarization weight.
pub fn design_pw(spec: &DesignSpec) -> Result<CodeDesign> {
    if spec.method != DesignMethod::Pw {
        return Err(Error::InvalidSpec(format!("design_pw called with method {}", spec.method)));
    }
    spec.validate()?;
    let beta_exp = spec.beta_exponent.expect("validated");
    let scores: Vec<f64> =
        (0..spec.block_length()).map(|k| pw_score(spec.n, k, beta_exp, spec.pw_anchor)).collect();
    let order = rank(&scores);
    Ok(CodeDesign::from_ranking(spec.clone(), scores.into_iter().map(Some).collect(), order))
}

/// Seed set for the accelerated design at initial mean `m0`.
///
/// Every seed has GA mean below `m0`, so anything operator-below a seed does too.
pub fn fast_seeds(n: u32, m0: f64) -> Result<(FastRegime, u32, Vec<ChannelIndex>)> {
    use std::f64::consts::{FRAC_PI_2, PI};
    if n == 0 {
        return Ok((FastRegime::BelowHalfPi, 0, Vec::new()));
    }
    if m0 < FRAC_PI_2 {
        let mut seeds = attractor_set(AttractorSpec::new(n, AttractorCase::BelowHalfPi)?);
        if n % 2 == 1 {
            // 1(01)^j doubles at its last step without an earlier halving.
            let alternating = (0..n).step_by(2).fold(0u64, |acc, j| acc | 1 << j);
            seeds.retain(|s| s.value() != alternating);
        }
        return Ok((FastRegime::BelowHalfPi, 0, seeds));
    }
    if m0 < PI {
        return Ok((FastRegime::BelowPi, 0, attractor_set(AttractorSpec::new(n, AttractorCase::BelowPi)?)));
    }
    let mut m = m0;
    let mut r = 0u32;
    while m >= FRAC_PI_2 && r < n {
        m = ga::minus_update(m);
        r += 1;
    }
    if m >= FRAC_PI_2 || r == n {
        return Ok((FastRegime::Prefix, r, vec![ChannelIndex::new(n, 0)?]));
    }
    let suffix = AttractorSpec::new(n - r, AttractorCase::BelowHalfPi)?;
    let seeds = suffix.iter().map(|s| ChannelIndex::new(n, s.value())).collect::<Result<_>>()?;
    Ok((FastRegime::Prefix, r, seeds))
}

/// Pre-freezes the operator closure of the seed set, then ranks the rest by GA.
pub fn design_fast(spec: &DesignSpec) -> Result<CodeDesign> {
    if spec.method != DesignMethod::FastGa {
        return Err(Error::InvalidSpec(format!("design_fast called with method {}", spec.method)));
    }
    spec.validate()?;
    let sigma2 = spec.sigma2.expect("validated");
    let param = ChannelParam::new(sigma2)?;
    let max_order = spec.max_order.unwrap_or(DEFAULT_MAX_ORDER).min(max_order_at(spec.n).max(1));
    let (regime, prefix_len, seeds) = fast_seeds(spec.n, param.m0())?;
    let closure: Vec<u64> = downward_closure(&seeds, max_order)?.into_iter().map(|c| c.value()).collect();
    let size = spec.block_length() as usize;
    let frozen_slots = spec.frozen_count() as usize;

    let mut report = FastReport {
        regime,
        prefix_len,
        max_order,
        seeds: seeds.len(),
        pre_frozen: closure.len(),
        ga_evaluations: size,
        ga_evaluations_saved: 0,
        fallback: false,
    };

    if frozen_slots < closure.len() {
        if !spec.allow_fallback {
            return Err(Error::Infeasible { frozen_slots, pre_frozen: closure.len() });
        }
        let ga_spec = DesignSpec { method: DesignMethod::Ga, max_order: None, ..spec.clone() };
        let mut design = design_ga(&ga_spec)?;
        design.spec = spec.clone();
        report.fallback = true;
        design.fast = Some(report);
        return Ok(design);
    }

    let mut pre = vec![false; size];
    for &c in &closure {
        pre[c as usize] = true;
    }
    let rest: Vec<u64> = (0..size as u64).filter(|&k| !pre[k as usize]).collect();
    let rest_means: Vec<f64> = rest
        .par_iter()
        .map(|&k| chain_mean(ChannelIndex::new(spec.n, k).expect("k < 2^n"), param.m0()))
        .collect();

    let mut scores = vec![None; size];
    for (&k, &m) in rest.iter().zip(&rest_means) {
        scores[k as usize] = Some(m);
    }
    let mut order = closure.clone();
    order.extend(rank(&rest_means).into_iter().map(|i| rest[i as usize]));

    report.ga_evaluations = rest.len();
    report.ga_evaluations_saved = closure.len();
    let mut design = CodeDesign::from_ranking(spec.clone(), scores, order);
    design.fast = Some(report);
    Ok(design)
}

/// Dispatches on `spec.method`.
pub fn design(spec: &DesignSpec) -> Result<CodeDesign> {
    match spec.method {
        DesignMethod::Ga => design_ga(spec),
        DesignMethod::Pw => design_pw(spec),
        DesignMethod::FastGa => design_fast(spec),
    }
}

/// Post-hoc check of the pre-frozen set: GA means of closure members versus `m0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub n: u32,
    pub sigma2: f64,
    pub regime: FastRegime,
    pub closure_size: usize,
    /// Closure members whose mean is not below `m0`.
    pub violations: Vec<u64>,
    /// Largest `mean / m0` over the closure.
    pub worst_ratio: f64,
}

pub fn certificate_check(n: u32, sigma2: f64, max_order: u32) -> Result<CertificateCheck> {
    let param = ChannelParam::new(sigma2)?;
    let m0 = param.m0();
    let (regime, _, seeds) = fast_seeds(n, m0)?;
    let closure = downward_closure(&seeds, max_order.min(max_order_at(n).max(1)))?;
    let means = ga::evolve(n, param);
    let mut violations = Vec::new();
    let mut worst_ratio = 0f64;
    for c in &closure {
        let m = means[c.value() as usize];
        worst_ratio = worst_ratio.max(m / m0);
        if !(m < m0) {
            violations.push(c.value());
        }
    }
    Ok(CertificateCheck { n, sigma2, regime, closure_size: closure.len(), violations, worst_ratio })
}

/// Frozen indices counted by Hamming weight.
pub fn weight_histogram(design: &CodeDesign) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for &f in &design.frozen {
        *h.entry(f.count_ones()).or_insert(0) += 1;
    }
    h
}

/// Histogram as a dense vector `w0..w{len-1}`, zero-filled.
pub fn histogram_vector(h: &BTreeMap<u32, usize>, len: usize) -> Vec<usize> {
    (0..len as u32).map(|w| h.get(&w).copied().unwrap_or(0)).collect()
}

/// `sigma^2 = 1 / (2 * 10^{EsN0/10})`.
pub fn sigma2_from_esn0_db(esn0_db: f64) -> f64 {
    1.0 / (2.0 * 10f64.powf(esn0_db / 10.0))
}

/// One point of a GA histogram scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub esn0_db: f64,
    pub sigma2: f64,
    pub histogram: Vec<usize>,
}

/// GA designs over an Es/N0 grid, histograms truncated to `len` weights.
pub fn ga_histogram_scan(n: u32, k: u64, esn0_db: &[f64], len: usize) -> Result<Vec<ScanPoint>> {
    esn0_db
        .par_iter()
        .map(|&db| {
            let sigma2 = sigma2_from_esn0_db(db);
            let d = design_ga(&DesignSpec::ga(n, k, sigma2))?;
            Ok(ScanPoint { esn0_db: db, sigma2, histogram: histogram_vector(&weight_histogram(&d), len) })
        })
        .collect()
}

/// L1 distance between two histograms.
pub fn histogram_distance(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y)).sum()
}

/// One row of a rule comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub sigma2: f64,
    pub rule: String,
    pub union_bound: f64,
}

/// Union bounds of GA and PW designs over a noise grid, all evaluated with GA means at that noise.
pub fn compare_rules(n: u32, k: u64, sigma2_grid: &[f64], beta_exponents: &[f64]) -> Result<Vec<ComparisonRow>> {
    let pw: Vec<(f64, CodeDesign)> = beta_exponents
        .iter()
        .map(|&b| Ok((b, design_pw(&DesignSpec::pw(n, k, b))?)))
        .collect::<Result<_>>()?;
    let per_point: Vec<Vec<ComparisonRow>> = sigma2_grid
        .par_iter()
        .map(|&s2| {
            let means = ga::evolve(n, ChannelParam::new(s2)?);
            let ga_design = design_ga(&DesignSpec::ga(n, k, s2))?;
            let mut rows = vec![ComparisonRow {
                sigma2: s2,
                rule: "ga".into(),
                union_bound: union_bound(&means, &ga_design.info)?,
            }];
            for (b, d) in &pw {
                rows.push(ComparisonRow {
                    sigma2: s2,
                    rule: format!("pw:{b}"),
                    union_bound: union_bound(&means, &d.info)?,
                });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("sigma2,rule,union_bound\n");
    for r in rows {
        out.push_str(&format!("{},{},{:e}\n", r.sigma2, r.rule, r.union_bound));
    }
    out
}

/// Bit-layout metadata stored with every design file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convention {
    pub bit_order: String,
    pub pw_anchor: String,
}

/// Method parameters as stored in a design file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<u32>,
    pub ga: GaMethod,
    pub allow_fallback: bool,
}

/// On-disk design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub n: u32,
    #[serde(rename = "K")]
    pub k: u64,
    pub method: DesignMethod,
    pub params: DesignParams,
    pub frozen: Vec<u64>,
    pub convention: Convention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast: Option<FastReport>,
}

impl DesignFile {
    pub fn from_design(d: &CodeDesign) -> Self {
        let s = &d.spec;
        Self {
            n: s.n,
            k: s.k,
            method: s.method,
            params: DesignParams {
                sigma2: s.sigma2,
                beta_exponent: s.beta_exponent,
                max_order: s.max_order,
                ga: s.ga,
                allow_fallback: s.allow_fallback,
            },
            frozen: d.frozen.clone(),
            convention: Convention { bit_order: "msb_first".into(), pw_anchor: s.pw_anchor.name().into() },
            fast: d.fast.clone(),
        }
    }

    pub fn spec(&self) -> Result<DesignSpec> {
        let spec = DesignSpec {
            n: self.n,
            k: self.k,
            method: self.method,
            sigma2: self.params.sigma2,
            beta_exponent: self.params.beta_exponent,
            max_order: self.params.max_order,
            ga: self.params.ga,
            pw_anchor: self.convention.pw_anchor.parse()?,
            allow_fallback: self.params.allow_fallback,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Rebuilds the partition, checking the stored frozen set for consistency.
    pub fn to_design(&self) -> Result<CodeDesign> {
        if self.convention.bit_order != "msb_first" {
            return Err(Error::InvalidSpec(format!("unsupported bit order '{}'", self.convention.bit_order)));
        }
        let spec = self.spec()?;
        let size = spec.block_length();
        let mut frozen = self.frozen.clone();
        frozen.sort_unstable();
        frozen.dedup();
        if frozen.len() as u64 != spec.frozen_count() {
            return Err(Error::LengthMismatch { expected: spec.frozen_count() as usize, got: frozen.len() });
        }
        if let Some(&bad) = frozen.iter().find(|&&f| f >= size) {
            return Err(Error::IndexOutOfRange { index: bad, n: spec.n });
        }
        let mut mask = vec![false; size as usize];
        for &f in &frozen {
            mask[f as usize] = true;
        }
        let info = (0..size).filter(|&k| !mask[k as usize]).collect();
        Ok(CodeDesign { spec, frozen, info, scores: vec![None; size as usize], fast: self.fast.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partition_ok(d: &CodeDesign) {
        let n = 1u64 << d.spec.n;
        assert_eq!(d.frozen.len() as u64, n - d.spec.k);
        assert_eq!(d.info.len() as u64, d.spec.k);
        let mut all: Vec<u64> = d.frozen.iter().chain(&d.info).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn extreme_rates() {
        let full = design_ga(&DesignSpec::ga(5, 32, 1.0)).unwrap();
        assert!(full.frozen.is_empty());
        let none = design_ga(&DesignSpec::ga(5, 0, 1.0)).unwrap();
        assert_eq!(none.frozen.len(), 32);
        assert!(weight_histogram(&full).is_empty());
    }

    #[test]
    fn pw_small_order() {
        let b = 0.25;
        let s: Vec<f64> = (0..4).map(|k| pw_score(2, k, b, PwAnchor::Lsb0)).collect();
        assert_eq!(s[0], 0.0);
        assert_eq!(s[1], 1.0);
        assert!((s[2] - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((s[3] - 1.0 - 2f64.powf(0.25)).abs() < 1e-15);
        let d = design_pw(&DesignSpec::pw(2, 3, b)).unwrap();
        assert_eq!(d.frozen, vec![0]);
        assert_eq!(weight_histogram(&d), BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn pw_histograms() {
        for (b, want) in [(0.25, [1, 10, 29, 23, 1]), (0.2, [1, 10, 34, 19, 0])] {
            for anchor in [PwAnchor::Lsb0, PwAnchor::Msb1] {
                let spec = DesignSpec { pw_anchor: anchor, ..DesignSpec::pw(10, 960, b) };
                let h = weight_histogram(&design_pw(&spec).unwrap());
                assert_eq!(histogram_vector(&h, 5), want, "beta_exp={b} anchor={anchor:?}");
                assert_eq!(h.values().sum::<usize>(), 64);
            }
        }
    }

    #[test]
    fn ga_ties_favor_smaller_index() {
        let order = rank(&[1.0, 0.5, 0.5, 2.0]);
        assert_eq!(order, vec![1, 2, 0, 3]);
    }

    #[test]
    fn monotone_in_rate() {
        for k in 0..64 {
            let a = design_ga(&DesignSpec::ga(6, k, 0.7)).unwrap();
            let b = design_ga(&DesignSpec::ga(6, k + 1, 0.7)).unwrap();
            assert!(b.frozen.iter().all(|f| a.frozen.contains(f)));
            let a = design_pw(&DesignSpec::pw(6, k, 0.25)).unwrap();
            let b = design_pw(&DesignSpec::pw(6, k + 1, 0.25)).unwrap();
            assert!(b.frozen.iter().all(|f| a.frozen.contains(f)));
        }
    }

    #[test]
    fn pw_ignores_channel() {
        let a = design_pw(&DesignSpec::pw(8, 100, 0.2)).unwrap();
        let b = design_pw(&DesignSpec::pw(8, 100, 0.2)).unwrap();
        assert_eq!(a, b);
        let mut bad = DesignSpec::pw(8, 100, 0.2);
        bad.sigma2 = Some(1.0);
        assert!(design_pw(&bad).is_err());
    }

    #[test]
    fn fast_regimes() {
        let (r, _, s) = fast_seeds(6, 1.0).unwrap();
        assert_eq!((r, s.len()), (FastRegime::BelowHalfPi, 21));
        let (r, _, s) = fast_seeds(5, 1.0).unwrap();
        assert_eq!(s.len(), 12);
        assert!(s.iter().all(|c| c.value() != 0b10101));
        let (r2, _, s2) = fast_seeds(6, 2.0).unwrap();
        assert_eq!((r, r2, s2.len()), (FastRegime::BelowHalfPi, FastRegime::BelowPi, 13));
        let (r, p, s) = fast_seeds(6, 10.0).unwrap();
        assert_eq!(r, FastRegime::Prefix);
        assert!(p >= 1);
        assert!(s.iter().all(|c| c.value() >> (6 - p) == 0));
    }

    #[test]
    fn fast_pre_freezes_closure() {
        let d = design_fast(&DesignSpec::fast(6, 16, 2.0, 3)).unwrap();
        partition_ok(&d);
        let f = d.fast.as_ref().unwrap();
        assert!(!f.fallback);
        assert_eq!(f.pre_frozen, 36);
        assert_eq!(f.ga_evaluations + f.ga_evaluations_saved, 64);
    }

    #[test]
    fn fast_fallback_and_refusal() {
        let spec = DesignSpec::fast(6, 60, 2.0, 3);
        let d = design_fast(&spec).unwrap();
        assert!(d.fast.as_ref().unwrap().fallback);
        let ga = design_ga(&DesignSpec::ga(6, 60, 2.0)).unwrap();
        assert_eq!(d.frozen, ga.frozen);
        let strict = DesignSpec { allow_fallback: false, ..spec };
        assert!(matches!(design_fast(&strict), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn fast_matches_ga_small() {
        for &s2 in &[0.3, 0.9, 2.0, 3.5] {
            for k in [8u64, 16, 24, 32] {
                let f = design_fast(&DesignSpec::fast(7, k, s2, 3)).unwrap();
                let g = design_ga(&DesignSpec::ga(7, k, s2)).unwrap();
                partition_ok(&f);
                assert_eq!(f.frozen, g.frozen, "sigma2={s2} K={k}");
            }
        }
    }

    #[test]
    fn certificate_small() {
        for &s2 in &[0.2, 0.6, 1.0, 1.5, 4.0] {
            for n in 1..=7 {
                let c = certificate_check(n, s2, 3).unwrap();
                assert!(c.violations.is_empty(), "{c:?}");
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(DesignSpec::ga(4, 17, 1.0).validate().is_err());
        assert!(DesignSpec::pw(4, 8, -1.0).validate().is_err());
        assert!(DesignSpec::fast(4, 8, 1.0, 4).validate().is_err());
        let mut s = DesignSpec::ga(4, 8, 1.0);
        s.sigma2 = None;
        assert!(s.validate().is_err());
        assert!("FastGA".parse::<DesignMethod>().is_ok());
    }

    #[test]
    fn file_round_trip() {
        let d = design_fast(&DesignSpec::fast(6, 20, 1.0, 3)).unwrap();
        let file = DesignFile::from_design(&d);
        let json = serde_json::to_string(&file).unwrap();
        assert!(json.contains("\"K\":20") && json.contains("\"bit_order\":\"msb_first\""));
        let back: DesignFile = serde_json::from_str(&json).unwrap();
        let d2 = back.to_design().unwrap();
        assert_eq!(d2.frozen, d.frozen);
        assert_eq!(d2.info, d.info);
        let mut broken = back.clone();
        broken.frozen.pop();
        assert!(broken.to_design().is_err());
    }

    #[test]
    fn chung_design_runs() {
        let d = design_ga(&DesignSpec::ga(5, 16, 1.0).with_ga(GaMethod::Chung)).unwrap();
        partition_ok(&d);
    }

    #[test]
    fn rule_comparison_full_rate() {
        let rows = compare_rules(5, 32, &[0.5, 1.0], &[0.25, 0.2]).unwrap();
        assert_eq!(rows.len(), 6);
        for pair in rows.chunks(3) {
            assert!(pair.iter().all(|r| r.union_bound == pair[0].union_bound));
        }
        assert!(comparison_csv(&rows).starts_with("sigma2,rule,union_bound\n"));
    }
}
