//! Synthetic-channel indices and the no-"11" combinatorics.
//!
//! A channel obtained by `n` polarization steps is labelled by an `n`-bit
//! integer read most-significant bit first: bit 1 is the first step, and a
//! set bit means the "plus" (better) transform. `W^{+--+}` is therefore index
//! 9 = `1001` at depth 4.
//!
//! Indices whose expansion has no two adjacent ones form the attractor. Their
//! number is the Fibonacci number `F_{n+2}` (with `F_0 = 0, F_1 = 1`), and the
//! complementary count `2^n - F_{n+2}` has the closed form
//! `2^{n-1} * sum_{t<n} F_t / 2^t`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported polarization depth.
pub const MAX_DEPTH: u32 = 64;

/// Index of a synthetic channel at a fixed polarization depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelIndex {
    n: u32,
    k: u64,
}

impl ChannelIndex {
    pub fn new(n: u32, k: u64) -> Result<Self> {
        if n > MAX_DEPTH {
            return Err(Error::InvalidDepth(n));
        }
        if n < 64 && k >> n != 0 {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        Ok(Self { n, k })
    }

    /// Builds an index from an MSB-first bit slice (entries 0 or 1).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let n = u32::try_from(bits.len()).map_err(|_| Error::InvalidDepth(u32::MAX))?;
        if n > MAX_DEPTH {
            return Err(Error::InvalidDepth(n));
        }
        let mut k = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidSpec(format!("bit value {b} is not 0 or 1")));
            }
            k = (k << 1) | b as u64;
        }
        Ok(Self { n, k })
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn value(&self) -> u64 {
        self.k
    }

    /// `2^n`, the number of synthetic channels at this depth.
    pub fn block_length(&self) -> u128 {
        block_length(self.n)
    }

    /// MSB-first bits; entry 0 is the first polarization step.
    pub fn bits(&self) -> Vec<u8> {
        (1..=self.n).map(|i| self.bit(i)).collect()
    }

    /// Bit `i` counted from the most significant end, `1 <= i <= n`.
    pub fn bit(&self, i: u32) -> u8 {
        debug_assert!(i >= 1 && i <= self.n);
        ((self.k >> (self.n - i)) & 1) as u8
    }

    pub fn weight(&self) -> u32 {
        self.k.count_ones()
    }

    pub fn has_adjacent_ones(&self) -> bool {
        has_adjacent_ones(self.k)
    }

    pub fn msb_is_zero(&self) -> bool {
        self.n == 0 || self.bit(1) == 0
    }
}

impl fmt::Display for ChannelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.n {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl FromStr for ChannelIndex {
    type Err = Error;

    /// Parses an MSB-first binary string such as `"1001"`.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidSpec(format!("'{other}' in binary index {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

/// `2^n` as an exact integer.
pub fn block_length(n: u32) -> u128 {
    1u128 << n
}

/// True iff the binary expansion of `k` contains two adjacent ones.
pub fn has_adjacent_ones(k: u64) -> bool {
    k & (k >> 1) != 0
}

/// Fibonacci number `F_i` with `F_0 = 0`, `F_1 = 1`.
///
/// Overflow of `u128` (first at `i = 187`) is reported rather than wrapped.
pub fn fibonacci(i: u32) -> Result<u128> {
    if i == 0 {
        return Ok(0);
    }
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 1..i {
        let next = a.checked_add(b).ok_or(Error::Overflow("fibonacci"))?;
        a = b;
        b = next;
    }
    Ok(b)
}

/// Natural-channel LLR regime that selects the attractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttractorCase {
    /// Natural channel mean LLR below pi/2: every no-11 index.
    #[serde(rename = "half_pi")]
    BelowHalfPi,
    /// Mean LLR below pi: no-11 indices whose first step is "minus".
    #[serde(rename = "pi")]
    BelowPi,
}

impl AttractorCase {
    pub fn threshold(&self) -> f64 {
        match self {
            AttractorCase::BelowHalfPi => std::f64::consts::FRAC_PI_2,
            AttractorCase::BelowPi => std::f64::consts::PI,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttractorCase::BelowHalfPi => "half_pi",
            AttractorCase::BelowPi => "pi",
        }
    }
}

impl FromStr for AttractorCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half_pi" => Ok(AttractorCase::BelowHalfPi),
            "pi" => Ok(AttractorCase::BelowPi),
            other => Err(Error::InvalidSpec(format!(
                "unknown attractor case {other:?} (expected half_pi or pi)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttractorSpec {
    pub n: u32,
    pub case: AttractorCase,
}

impl AttractorSpec {
    pub fn new(n: u32, case: AttractorCase) -> Result<Self> {
        if n == 0 || n > MAX_DEPTH {
            return Err(Error::InvalidDepth(n));
        }
        Ok(Self { n, case })
    }

    pub fn contains(&self, k: u64) -> bool {
        let in_range = self.n == 64 || k >> self.n == 0;
        let msb_ok = match self.case {
            AttractorCase::BelowHalfPi => true,
            AttractorCase::BelowPi => (k >> (self.n - 1)) & 1 == 0,
        };
        in_range && msb_ok && !has_adjacent_ones(k)
    }

    /// `F_{n+2}` for [`AttractorCase::BelowHalfPi`], `F_{n+1}` for [`AttractorCase::BelowPi`].
    pub fn cardinality(&self) -> Result<u128> {
        match self.case {
            AttractorCase::BelowHalfPi => fibonacci(self.n + 2),
            AttractorCase::BelowPi => fibonacci(self.n + 1),
        }
    }

    /// Members in ascending order, generated without scanning all `2^n` indices.
    pub fn iter(&self) -> AttractorIter {
        AttractorIter { spec: *self, next: Some(0) }
    }
}

/// Ascending iterator over attractor members.
#[derive(Debug, Clone)]
pub struct AttractorIter {
    spec: AttractorSpec,
    next: Option<u64>,
}

impl Iterator for AttractorIter {
    type Item = ChannelIndex;

    fn next(&mut self) -> Option<ChannelIndex> {
        let current = self.next?;
        if !self.spec.contains(current) {
            self.next = None;
            return None;
        }
        self.next = next_without_adjacent_ones(current).filter(|&y| self.spec.contains(y));
        Some(ChannelIndex { n: self.spec.n, k: current })
    }
}

/// Smallest `y > x` without adjacent ones.
fn next_without_adjacent_ones(x: u64) -> Option<u64> {
    let mut y = x.checked_add(1)?;
    loop {
        let pairs = y & (y >> 1);
        if pairs == 0 {
            return Some(y);
        }
        // Highest offending pair sits at bits (t + 1, t): carry into bit t + 2.
        let t = 63 - pairs.leading_zeros();
        let mask = if t + 2 >= 64 { u64::MAX } else { (1u64 << (t + 2)) - 1 };
        y = (y | mask).checked_add(1)?;
    }
}

/// All attractor members, sorted ascending.
pub fn attractor_set(spec: AttractorSpec) -> Vec<ChannelIndex> {
    spec.iter().collect()
}

/// Number of `n`-bit strings containing `11`, by the closed form
/// `2^{n-1} * sum_{t=0}^{n-1} F_t / 2^t = sum_{t=0}^{n-1} F_t 2^{n-1-t}`.
pub fn count_with_11(n: u32) -> Result<u128> {
    if n == 0 || n > MAX_DEPTH {
        return Err(Error::InvalidDepth(n));
    }
    let mut total = 0u128;
    for t in 0..n {
        let term = fibonacci(t)?
            .checked_mul(1u128 << (n - 1 - t))
            .ok_or(Error::Overflow("count_with_11"))?;
        total = total.checked_add(term).ok_or(Error::Overflow("count_with_11"))?;
    }
    Ok(total)
}

/// Same count split by where the first `11` occurs: either the string starts
/// with `11` (`2^{n-2}` strings), or a no-11 prefix of length `t` is followed
/// by `011` and an arbitrary tail (`F_{t+2} 2^{n-t-3}` strings).
pub fn count_with_11_by_parts(n: u32) -> Result<u128> {
    if n == 0 || n > MAX_DEPTH {
        return Err(Error::InvalidDepth(n));
    }
    if n == 1 {
        return Ok(0);
    }
    let mut total = 1u128 << (n - 2);
    for t in 0..n.saturating_sub(2) {
        let term = fibonacci(t + 2)?
            .checked_mul(1u128 << (n - t - 3))
            .ok_or(Error::Overflow("count_with_11_by_parts"))?;
        total = total.checked_add(term).ok_or(Error::Overflow("count_with_11_by_parts"))?;
    }
    Ok(total)
}

/// Fraction of the `2^n` indices that contain `11`, i.e. lie outside the attractor.
///
/// This is the "rate" one gets by freezing exactly the attractor: for `n = 6`
/// it is 43/64 = 0.671875, for `n = 16` it is `1 - 2584/65536 = 0.96057...`.
pub fn fraction_with_11(n: u32) -> Result<f64> {
    let delta = count_with_11(n)?;
    Ok(delta as f64 / block_length(n) as f64)
}

/// Partial sum `sum_{t=0}^{terms-1} F_t / base^t`.
pub fn fibonacci_series_partial(base: f64, terms: u32) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut scale = 1.0;
    let mut sum = 0.0;
    for _ in 0..terms {
        sum += a * scale;
        let next = a + b;
        a = b;
        b = next;
        scale /= base;
    }
    sum
}

/// Closed form of `sum_{t>=0} F_t / base^t = base / (base^2 - base - 1)`, valid for base above the golden ratio.
pub fn fibonacci_series_limit(base: f64) -> f64 {
    base / (base * base - base - 1.0)
}

/// On-disk form of an attractor: `{"n":…, "case":"half_pi"|"pi", "indices":[…]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttractorFile {
    pub n: u32,
    pub case: AttractorCase,
    pub indices: Vec<u64>,
}

impl AttractorFile {
    pub fn from_spec(spec: AttractorSpec) -> Self {
        Self {
            n: spec.n,
            case: spec.case,
            indices: spec.iter().map(|c| c.value()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(s: &str) -> ChannelIndex {
        s.parse().unwrap()
    }

    #[test]
    fn bits_msb_first() {
        assert_eq!(ChannelIndex::new(4, 9).unwrap().bits(), vec![1, 0, 0, 1]);
        assert_eq!(ChannelIndex::new(4, 3).unwrap().bits(), vec![0, 0, 1, 1]);
        assert_eq!(ChannelIndex::new(3, 0).unwrap().bits(), vec![0, 0, 0]);
        assert_eq!(idx("1001").value(), 9);
        assert_eq!(ChannelIndex::new(6, 40).unwrap().to_string(), "101000");
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ChannelIndex::new(4, 16).is_err());
        assert!(ChannelIndex::new(65, 0).is_err());
        assert!(ChannelIndex::new(64, u64::MAX).is_ok());
        assert!("10a1".parse::<ChannelIndex>().is_err());
    }

    #[test]
    fn adjacent_ones() {
        assert!(!idx("1001").has_adjacent_ones());
        assert!(idx("0011").has_adjacent_ones());
        assert!(!ChannelIndex::new(6, 40).unwrap().has_adjacent_ones());
    }

    #[test]
    fn fibonacci_values() {
        assert_eq!(fibonacci(0).unwrap(), 0);
        assert_eq!(fibonacci(1).unwrap(), 1);
        assert_eq!(fibonacci(8).unwrap(), 21);
        assert_eq!(fibonacci(18).unwrap(), 2584);
        assert!(fibonacci(186).is_ok());
        assert!(matches!(fibonacci(187), Err(Error::Overflow(_))));
    }

    #[test]
    fn attractor_small_cases() {
        let a1: Vec<u64> = attractor_set(AttractorSpec::new(1, AttractorCase::BelowHalfPi).unwrap())
            .iter()
            .map(|c| c.value())
            .collect();
        assert_eq!(a1, vec![0, 1]);
        let s6 = AttractorSpec::new(6, AttractorCase::BelowHalfPi).unwrap();
        assert_eq!(attractor_set(s6).len(), 21);
        let p6 = AttractorSpec::new(6, AttractorCase::BelowPi).unwrap();
        assert_eq!(attractor_set(p6).len(), 13);
        assert!(AttractorSpec::new(0, AttractorCase::BelowPi).is_err());
    }

    #[test]
    fn attractor_at_full_width_terminates() {
        let spec = AttractorSpec::new(64, AttractorCase::BelowPi).unwrap();
        let last = spec.iter().take(10).last().unwrap();
        assert_eq!(last.value(), 0b10001);
        assert_eq!(spec.cardinality().unwrap(), fibonacci(65).unwrap());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(count_with_11(2).unwrap(), 1);
        assert_eq!(count_with_11(6).unwrap(), 43);
        assert_eq!(count_with_11(10).unwrap(), 880);
        assert_eq!(count_with_11_by_parts(10).unwrap(), 880);
        assert_eq!(count_with_11(1).unwrap(), 0);
        assert!(count_with_11(0).is_err());
    }

    #[test]
    fn fraction_examples() {
        assert_eq!(fraction_with_11(6).unwrap(), 0.671875);
        assert!((fraction_with_11(16).unwrap() - (1.0 - 2584.0 / 65536.0)).abs() < 1e-15);
        assert!(fraction_with_11(64).unwrap() >= 0.9999);
    }

    #[test]
    fn attractor_json_shape() {
        let file = AttractorFile::from_spec(AttractorSpec::new(2, AttractorCase::BelowPi).unwrap());
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(json, r#"{"n":2,"case":"pi","indices":[0,1]}"#);
        let back: AttractorFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
    }
}
