//! Universal partial order on synthetic channels.
//!
//! Operators of increasing order relate two indices `l` and `k` of the same
//! depth with `W_l ⪯ W_k`:
//!
//! * order 1 (addition): `k` is `l` with one more bit set;
//! * order 2 (left swap): `k` is `l` with one set bit moved to a more
//!   significant zero position;
//! * order `i >= 3`: two disjoint windows `A` (left) and `B` (right) of length
//!   `2^{i-2}`; `l` reads `E_{i-1}` on `A` and its complement on `B`, `k` reads
//!   the complement on `A` and `E_{i-1}` on `B`, all other bits equal.
//!
//! `E_1 = 0` and `E_{j+1} = E_j | !E_j`, so the adjacent-window case is the
//! substring rule `0110 -> 1001`, `01101001 -> 10010110`, … Order 2 is the
//! same two-window rule with windows of length one.
//!
//! Every operator strictly increases the integer value of the index, which
//! keeps the generated relation acyclic and lets closures be built in a single
//! ascending sweep.

use std::collections::{HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{ChannelIndex, MAX_DEPTH};

/// Exhaustive (fully materialized) analysis is limited to this depth.
pub const EXHAUSTIVE_LIMIT: u32 = 12;

/// Default node budget for on-demand comparability searches.
pub const DEFAULT_SEARCH_BUDGET: usize = 1_000_000;

/// The order-`i` operator pattern pair `E_i`, `E_i*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorOrder {
    order: u32,
    low: u64,
    high: u64,
    len: u32,
}

impl OperatorOrder {
    /// Patterns for order `i >= 1`; `|E_i| = 2^{i-1}` must fit in 64 bits.
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 || order > 7 {
            return Err(Error::InvalidOrder { order, n: MAX_DEPTH });
        }
        let mut low = 0u64;
        let mut len = 1u32;
        for _ in 1..order {
            let mask = (1u64 << len) - 1;
            low = (low << len) | (!low & mask);
            len *= 2;
        }
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Ok(Self { order, low, high: !low & mask, len })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `E_i` as an MSB-first bit string.
    pub fn pattern_low(&self) -> String {
        format!("{:0width$b}", self.low, width = self.len as usize)
    }

    /// `E_i*`, the bitwise complement of `E_i`.
    pub fn pattern_high(&self) -> String {
        format!("{:0width$b}", self.high, width = self.len as usize)
    }

    /// Whether the operator fits at depth `n`, i.e. `2^{i-1} <= n`.
    pub fn available_at(&self, n: u32) -> bool {
        self.len <= n
    }
}

/// Highest operator order available at depth `n` (largest `i` with `2^{i-1} <= n`).
///
/// For `n` a power of two this is `1 + log2(n)`, i.e. `1 + log2 log2 N`.
pub fn max_order_at(n: u32) -> u32 {
    if n == 0 {
        return 0;
    }
    32 - n.leading_zeros()
}

fn check_same_depth(l: ChannelIndex, k: ChannelIndex) -> Result<()> {
    if l.depth() != k.depth() {
        return Err(Error::DepthMismatch(l.depth(), k.depth()));
    }
    Ok(())
}

fn check_order(order: u32, n: u32) -> Result<()> {
    if order == 0 || order > max_order_at(n) {
        return Err(Error::InvalidOrder { order, n });
    }
    Ok(())
}

/// Generalized addition: `k` contains every bit of `l` (zero or more 0→1 flips).
pub fn op1_addition(l: ChannelIndex, k: ChannelIndex) -> Result<bool> {
    check_same_depth(l, k)?;
    Ok(l.value() & !k.value() == 0)
}

/// Exactly one 0→1 flip.
pub fn single_addition(l: ChannelIndex, k: ChannelIndex) -> Result<bool> {
    check_same_depth(l, k)?;
    let diff = l.value() ^ k.value();
    Ok(diff.count_ones() == 1 && k.value() & diff != 0)
}

/// One set bit of `l` moved to a strictly more significant zero position.
pub fn op2_left_swap(l: ChannelIndex, k: ChannelIndex) -> Result<bool> {
    check_same_depth(l, k)?;
    Ok(two_window_move(2, l.value(), k.value()))
}

/// One application of the order-`order` two-window operator (`order >= 2`).
pub fn op_multi(order: u32, l: ChannelIndex, k: ChannelIndex) -> Result<bool> {
    check_same_depth(l, k)?;
    check_order(order, l.depth())?;
    if order < 2 {
        return Err(Error::InvalidOrder { order, n: l.depth() });
    }
    Ok(two_window_move(order, l.value(), k.value()))
}

/// Whether `(l, k)` is a single application of the operator of the given order.
pub fn is_direct(order: u32, l: ChannelIndex, k: ChannelIndex) -> Result<bool> {
    match order {
        1 => single_addition(l, k),
        _ => op_multi(order, l, k),
    }
}

/// Window geometry for order `order >= 2`: pattern placed on `A` in the lower index.
fn window_patterns(order: u32) -> (u64, u64, u32) {
    let base = OperatorOrder::new(order - 1).expect("order checked by caller");
    (base.low, base.high, base.len)
}

fn two_window_move(order: u32, l: u64, k: u64) -> bool {
    let diff = l ^ k;
    if diff == 0 {
        return false;
    }
    // The most significant differing bit must start window A.
    let top = 63 - diff.leading_zeros();
    let (low, high, w) = window_patterns(order);
    if top + 1 < w {
        return false;
    }
    let a_shift = top + 1 - w;
    let a_mask = ((1u64 << w) - 1) << a_shift;
    let rest = diff & !a_mask;
    if rest == 0 {
        return false;
    }
    if a_shift < w {
        return false;
    }
    // Window B lies right of A and must hold every remaining differing bit.
    (0..=a_shift - w).any(|b_shift| {
        let b_mask = ((1u64 << w) - 1) << b_shift;
        rest & !b_mask == 0
            && (l & a_mask) >> a_shift == low
            && (k & a_mask) >> a_shift == high
            && (l & b_mask) >> b_shift == high
            && (k & b_mask) >> b_shift == low
    })
}

/// Indices reachable from `k` by one downward operator step of order `<= max_order`.
pub fn lower_neighbors(n: u32, k: u64, max_order: u32) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    // order 1: clear one set bit
    let mut bits = k;
    while bits != 0 {
        let b = bits & bits.wrapping_neg();
        out.push((k & !b, 1));
        bits &= bits - 1;
    }
    for order in 2..=max_order.min(max_order_at(n)) {
        let (low, high, w) = window_patterns(order);
        let mask = (1u64 << w) - 1;
        // Window A at shift a (higher), window B at shift b <= a - w.
        for a in (w - 1)..n {
            let a_shift = a + 1 - w;
            if (k >> a_shift) & mask != high {
                continue;
            }
            if a_shift < w {
                continue;
            }
            for b_shift in 0..=(a_shift - w) {
                if (k >> b_shift) & mask != low {
                    continue;
                }
                let cleared = k & !(mask << a_shift) & !(mask << b_shift);
                let lower = cleared | (low << a_shift) | (high << b_shift);
                out.push((lower, order));
            }
        }
    }
    out
}

/// Indices reachable from `l` by one upward operator step of order `<= max_order`.
pub fn upper_neighbors(n: u32, l: u64, max_order: u32) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for pos in 0..n {
        if l >> pos & 1 == 0 {
            out.push((l | 1u64 << pos, 1));
        }
    }
    for order in 2..=max_order.min(max_order_at(n)) {
        let (low, high, w) = window_patterns(order);
        let mask = (1u64 << w) - 1;
        for a in (w - 1)..n {
            let a_shift = a + 1 - w;
            if (l >> a_shift) & mask != low || a_shift < w {
                continue;
            }
            for b_shift in 0..=(a_shift - w) {
                if (l >> b_shift) & mask != high {
                    continue;
                }
                let cleared = l & !(mask << a_shift) & !(mask << b_shift);
                out.push((cleared | (high << a_shift) | (low << b_shift), order));
            }
        }
    }
    out
}

/// Outcome of a comparability query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    LessEq,
    GreaterEq,
    Equal,
    Incomparable,
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Comparison::LessEq => "LessEq",
            Comparison::GreaterEq => "GreaterEq",
            Comparison::Equal => "Equal",
            Comparison::Incomparable => "Incomparable",
        };
        f.write_str(s)
    }
}

/// Pairwise query under the closure of all operators of order `<= max_order`.
///
/// Runs a bounded upward search, so it works at any depth without
/// materializing the relation.
pub fn comparable(l: ChannelIndex, k: ChannelIndex, max_order: u32) -> Result<Comparison> {
    comparable_with_budget(l, k, max_order, DEFAULT_SEARCH_BUDGET)
}

pub fn comparable_with_budget(
    l: ChannelIndex,
    k: ChannelIndex,
    max_order: u32,
    budget: usize,
) -> Result<Comparison> {
    check_same_depth(l, k)?;
    let n = l.depth();
    if max_order == 0 || max_order > max_order_at(n).max(1) {
        return Err(Error::InvalidOrder { order: max_order, n });
    }
    let (a, b) = (l.value(), k.value());
    if a == b {
        return Ok(Comparison::Equal);
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if reaches_upward(n, lo, hi, max_order, budget)? {
        Ok(if a < b { Comparison::LessEq } else { Comparison::GreaterEq })
    } else {
        Ok(Comparison::Incomparable)
    }
}

fn reaches_upward(n: u32, from: u64, to: u64, max_order: u32, budget: usize) -> Result<bool> {
    let target_weight = to.count_ones();
    if from.count_ones() > target_weight {
        return Ok(false);
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([from]);
    seen.insert(from);
    while let Some(y) = queue.pop_front() {
        for (z, _) in upper_neighbors(n, y, max_order) {
            if z == to {
                return Ok(true);
            }
            // Every step increases the integer value and never decreases weight.
            if z > to || z.count_ones() > target_weight || !seen.insert(z) {
                continue;
            }
            if seen.len() > budget {
                return Err(Error::SearchBudgetExceeded(budget));
            }
            queue.push_back(z);
        }
    }
    Ok(false)
}

/// All indices `l` with `l ⪯ s` for some seed `s`, seeds included.
pub fn downward_closure(seeds: &[ChannelIndex], max_order: u32) -> Result<Vec<ChannelIndex>> {
    let Some(first) = seeds.first() else {
        return Ok(Vec::new());
    };
    let n = first.depth();
    for s in seeds {
        if s.depth() != n {
            return Err(Error::DepthMismatch(n, s.depth()));
        }
    }
    let mut seen: HashSet<u64> = seeds.iter().map(|s| s.value()).collect();
    let mut stack: Vec<u64> = seen.iter().copied().collect();
    while let Some(k) = stack.pop() {
        for (l, _) in lower_neighbors(n, k, max_order) {
            if seen.insert(l) {
                stack.push(l);
            }
        }
    }
    let mut out: Vec<u64> = seen.into_iter().collect();
    out.sort_unstable();
    out.into_iter().map(|k| ChannelIndex::new(n, k)).collect()
}

/// Where an edge of the relation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Operator(u32),
    Measured,
}

impl Provenance {
    pub fn tag(&self) -> String {
        match self {
            Provenance::Operator(i) => format!("op{i}"),
            Provenance::Measured => "measured".to_string(),
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        if tag == "measured" {
            return Ok(Provenance::Measured);
        }
        tag.strip_prefix("op")
            .and_then(|i| i.parse().ok())
            .map(Provenance::Operator)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown edge provenance {tag:?}")))
    }
}

/// Generating edge `lower ⪯ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub lower: u64,
    pub upper: u64,
    pub provenance: Provenance,
}

/// Materialized comparability relation at a fixed depth (`n <= 12`).
#[derive(Debug, Clone)]
pub struct PosetRelation {
    n: u32,
    max_order: u32,
    edges: Vec<Edge>,
    /// `down[k]` holds every `l` with `l ⪯ k` (reflexive).
    down: Vec<FixedBitSet>,
}

impl PosetRelation {
    /// Operator-generated relation and its reflexive-transitive closure.
    pub fn build(n: u32, max_order: u32) -> Result<Self> {
        if n > EXHAUSTIVE_LIMIT {
            return Err(Error::TooLarge { n, limit: EXHAUSTIVE_LIMIT });
        }
        if max_order == 0 || (n > 0 && max_order > max_order_at(n)) {
            return Err(Error::InvalidOrder { order: max_order, n });
        }
        let size = 1usize << n;
        let mut edges = Vec::new();
        let mut down: Vec<FixedBitSet> = Vec::with_capacity(size);
        for k in 0..size as u64 {
            let mut set = FixedBitSet::with_capacity(size);
            set.insert(k as usize);
            let mut neighbors = lower_neighbors(n, k, max_order);
            neighbors.sort_unstable();
            neighbors.dedup_by_key(|(l, _)| *l);
            for (l, order) in neighbors {
                // l < k, so its closure is final already.
                set.union_with(&down[l as usize]);
                edges.push(Edge { lower: l, upper: k, provenance: Provenance::Operator(order) });
            }
            down.push(set);
        }
        Ok(Self { n, max_order, edges, down })
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn size(&self) -> usize {
        self.down.len()
    }

    /// `l ⪯ k` in the closure.
    pub fn le(&self, l: u64, k: u64) -> bool {
        self.down[k as usize].contains(l as usize)
    }

    pub fn compare(&self, l: u64, k: u64) -> Comparison {
        if l == k {
            Comparison::Equal
        } else if self.le(l, k) {
            Comparison::LessEq
        } else if self.le(k, l) {
            Comparison::GreaterEq
        } else {
            Comparison::Incomparable
        }
    }

    /// The set `{ l : l ⪯ k }`.
    pub fn down_set(&self, k: u64) -> &FixedBitSet {
        &self.down[k as usize]
    }

    /// Number of ordered pairs `l ≺ k` with `l != k`.
    pub fn comparable_pairs(&self) -> u64 {
        self.down.iter().map(|d| d.count_ones(..) as u64 - 1).sum()
    }

    pub fn incomparable_pairs(&self) -> u64 {
        let size = self.size() as u64;
        size * (size - 1) / 2 - self.comparable_pairs()
    }

    /// Adds measured relations `lower ≺ upper` and re-closes.
    ///
    /// Pairs already implied leave the relation unchanged; a pair whose
    /// reverse is already implied is rejected as inconsistent.
    pub fn augment_with_measurement(&self, measured: &[(u64, u64)]) -> Result<Self> {
        let mut next = self.clone();
        let size = next.size() as u64;
        for &(lower, upper) in measured {
            for v in [lower, upper] {
                if v >= size {
                    return Err(Error::IndexOutOfRange { index: v, n: self.n });
                }
            }
            if next.le(lower, upper) {
                continue;
            }
            if next.le(upper, lower) {
                return Err(Error::Cycle { lower, upper });
            }
            next.edges.push(Edge { lower, upper, provenance: Provenance::Measured });
            let below = next.down[lower as usize].clone();
            for y in 0..next.down.len() {
                if next.down[y].contains(upper as usize) {
                    next.down[y].union_with(&below);
                }
            }
        }
        Ok(next)
    }

    /// Poset width and one maximum antichain (Dilworth via bipartite matching).
    pub fn max_antichain(&self) -> Vec<u64> {
        let size = self.size();
        // Strict-upper adjacency: x -> y for x ≺ y.
        let ups: Vec<Vec<usize>> = {
            let mut ups = vec![Vec::new(); size];
            for (y, d) in self.down.iter().enumerate() {
                for x in d.ones() {
                    if x != y {
                        ups[x].push(y);
                    }
                }
            }
            ups
        };
        let matching = hopcroft_karp(&ups, size);
        // König: from unmatched left vertices, alternate non-matching / matching edges.
        let mut left_seen = vec![false; size];
        let mut right_seen = vec![false; size];
        let mut queue: VecDeque<usize> =
            (0..size).filter(|&x| matching.left[x].is_none()).collect();
        for &x in &queue {
            left_seen[x] = true;
        }
        while let Some(x) = queue.pop_front() {
            for &y in &ups[x] {
                if right_seen[y] {
                    continue;
                }
                right_seen[y] = true;
                if let Some(x2) = matching.right[y] {
                    if !left_seen[x2] {
                        left_seen[x2] = true;
                        queue.push_back(x2);
                    }
                }
            }
        }
        // Cover = (L \ Z) ∪ (R ∩ Z); antichain = elements in neither side of the cover.
        (0..size).filter(|&v| left_seen[v] && !right_seen[v]).map(|v| v as u64).collect()
    }

    /// Export as `{ "n", "max_order", "edges": [[l,k],…], "provenance": [...] }`.
    pub fn to_file(&self) -> PosetFile {
        PosetFile {
            n: self.n,
            max_order: self.max_order,
            edges: self.edges.iter().map(|e| [e.lower, e.upper]).collect(),
            provenance: self.edges.iter().map(|e| e.provenance.tag()).collect(),
        }
    }
}

struct Matching {
    left: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
}

fn hopcroft_karp(adj: &[Vec<usize>], right_size: usize) -> Matching {
    let left_size = adj.len();
    let mut left = vec![None; left_size];
    let mut right: Vec<Option<usize>> = vec![None; right_size];
    let mut dist = vec![u32::MAX; left_size];
    loop {
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for x in 0..left_size {
            if left[x].is_none() {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                match right[y] {
                    None => found = true,
                    Some(x2) if dist[x2] == u32::MAX => {
                        dist[x2] = dist[x] + 1;
                        queue.push_back(x2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        for x in 0..left_size {
            if left[x].is_none() {
                augment(x, adj, &mut left, &mut right, &mut dist);
            }
        }
    }
    Matching { left, right }
}

fn augment(
    x: usize,
    adj: &[Vec<usize>],
    left: &mut [Option<usize>],
    right: &mut [Option<usize>],
    dist: &mut [u32],
) -> bool {
    for &y in &adj[x] {
        let ok = match right[y] {
            None => true,
            Some(x2) => dist[x2] == dist[x] + 1 && augment(x2, adj, left, right, dist),
        };
        if ok {
            left[x] = Some(y);
            right[y] = Some(x);
            return true;
        }
    }
    dist[x] = u32::MAX;
    false
}

/// Antichain statistics for the exhaustive relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntichainReport {
    pub n: u32,
    pub max_order: u32,
    pub incomparable_pairs: u64,
    pub width: usize,
    pub max_antichain: Vec<u64>,
}

/// Incomparable-pair count and a maximum antichain under operators `<= max_order`.
pub fn antichain_count(n: u32, max_order: u32) -> Result<AntichainReport> {
    let relation = PosetRelation::build(n, max_order)?;
    let antichain = relation.max_antichain();
    Ok(AntichainReport {
        n,
        max_order,
        incomparable_pairs: relation.incomparable_pairs(),
        width: antichain.len(),
        max_antichain: antichain,
    })
}

/// Edge-list export format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetFile {
    pub n: u32,
    pub max_order: u32,
    pub edges: Vec<[u64; 2]>,
    pub provenance: Vec<String>,
}
