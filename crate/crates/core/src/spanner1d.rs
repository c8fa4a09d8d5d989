//! Reliable exact spanners on the integer line.
//!
//! Positions are `1..=n`; vertex ids are `position - 1`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expander::{bipartite_budget, bipartite_constant, sample_bipartite};
use crate::graph::{VertexSet, WeightedGraph};
use crate::rng::{tags, StreamKey};
use crate::scalar::Scalar;

/// Smallest power of two `>= n` (at least 1).
pub fn pow2(n: u64) -> u64 {
    n.max(1).next_power_of_two()
}

/// Closed integer range of positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalBlock {
    pub lo: i64,
    pub hi: i64,
}

impl IntervalBlock {
    pub fn len(&self) -> u64 {
        (self.hi - self.lo + 1).max(0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn clip(&self, n: u64) -> IntervalBlock {
        IntervalBlock { lo: self.lo.max(1), hi: self.hi.min(n as i64) }
    }

    /// Vertex ids (`position - 1`) of the block.
    pub fn ids(&self) -> Vec<u32> {
        (self.lo..=self.hi).map(|p| (p - 1) as u32).collect()
    }
}

/// Dyadic blocks over `1..=n_padded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockTree {
    pub n_padded: u64,
}

/// A block at `level` (size `2^level`) with 0-based `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Block {
    pub level: u32,
    pub index: u64,
}

impl Block {
    pub fn interval(&self) -> IntervalBlock {
        let s = 1i64 << self.level;
        IntervalBlock { lo: self.index as i64 * s + 1, hi: (self.index as i64 + 1) * s }
    }

    pub fn parent(&self) -> Block {
        Block { level: self.level + 1, index: self.index / 2 }
    }

    pub fn is_right_child(&self) -> bool {
        self.index % 2 == 1
    }
}

impl BlockTree {
    pub fn new(n: u64) -> Self {
        BlockTree { n_padded: pow2(n) }
    }

    pub fn height(&self) -> u32 {
        self.n_padded.trailing_zeros()
    }

    pub fn blocks(&self, level: u32) -> impl Iterator<Item = Block> {
        (0..self.n_padded >> level).map(move |index| Block { level, index })
    }

    pub fn leaf(&self, position: u64) -> Block {
        Block { level: 0, index: position - 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalWalk {
    pub ascent: Vec<IntervalBlock>,
    /// From the meeting level down to `j`'s leaf.
    pub descent: Vec<IntervalBlock>,
}

/// Block walk between positions `i < j` of the padded tree.
pub fn canonical_walk(n: u64, i: u64, j: u64) -> Result<CanonicalWalk> {
    let tree = BlockTree::new(n);
    if i == 0 || i >= j || j > tree.n_padded {
        return Err(invalid(format!("canonical walk needs 1 <= i < j <= {}, got ({i}, {j})", tree.n_padded)));
    }
    let (mut a, mut b) = (tree.leaf(i), tree.leaf(j));
    let mut ascent = vec![a.interval()];
    let mut descent = vec![b.interval()];
    loop {
        if b.index == a.index + 1 {
            break;
        }
        if a.is_right_child() {
            a.index += 1;
        } else if !b.is_right_child() {
            b.index -= 1;
        } else {
            a = a.parent();
            b = b.parent();
        }
        for (blk, list) in [(a, &mut ascent), (b, &mut descent)] {
            let iv = blk.interval();
            if list.last() != Some(&iv) {
                list.push(iv);
            }
        }
    }
    descent.reverse();
    Ok(CanonicalWalk { ascent, descent })
}

/// Expander parameter used between neighboring blocks of `H`.
pub const H_XI: f64 = 1.0 / 16.0;

#[derive(Debug, Clone)]
pub struct HSpanner<T> {
    pub graph: WeightedGraph<T>,
    pub n_padded: u64,
    pub xi: f64,
    pub constant: u64,
    pub experimental: bool,
    /// Upper bound on sampled pairs before deduplication.
    pub budget: u64,
}

/// Sampling budget of `H` on `n_padded` vertices: every level's neighbor
/// pairs, each `c⌈n/|L|⌉` per side.
pub fn h_budget(n_padded: u64, constant: u64) -> u64 {
    let h = pow2(n_padded).trailing_zeros();
    (0..h).map(|i| ((1u64 << (h - i)) - 1) * bipartite_budget(1 << i, 1 << i, constant)).sum()
}

/// The dyadic-block spanner `H`: an expander between every pair of
/// neighboring same-level blocks of the padded tree, truncated to `n`.
pub fn build_h<T: Scalar>(n: usize, xi: f64, seed: u64, constant_override: Option<u64>) -> Result<HSpanner<T>> {
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(invalid(format!("xi must lie in (0,1), got {xi}")));
    }
    let tree = BlockTree::new(n as u64);
    let constant = constant_override.unwrap_or_else(|| bipartite_constant(xi));
    let key = StreamKey::root(seed).child(tags::H_TREE);
    let mut pairs = Vec::new();
    for level in 0..tree.height() {
        let count = tree.n_padded >> level;
        for index in 0..count - 1 {
            let a = Block { level, index }.interval();
            let b = Block { level, index: index + 1 }.interval();
            sample_bipartite(&a.ids(), &b.ids(), constant, key.path(&[level as u64, index]), &mut pairs);
        }
    }
    let full = WeightedGraph::line(tree.n_padded as usize, pairs)?;
    Ok(HSpanner {
        graph: full.truncate(n),
        n_padded: tree.n_padded,
        xi,
        constant,
        experimental: constant_override.is_some(),
        budget: h_budget(tree.n_padded, constant),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Faithful,
    Experimental,
}

/// Smallest `c` admitted in faithful mode.
pub const FAITHFUL_C: f64 = 512.0;

/// Expander sampling constant used in experimental mode unless overridden.
pub const EXPERIMENTAL_DEGREE: u64 = 2;

/// Shifted interval layout of `G_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftedLayout {
    pub n: u64,
    pub n_padded: u64,
    /// Number of shifts per resolution, `pow2(c/θ²)`.
    pub big_n: u64,
    pub xi: f64,
}

impl ShiftedLayout {
    pub fn new(n: u64, theta: f64, c: f64) -> Self {
        // Capped so that absurdly small θ still yields a (degenerate) layout.
        let big_n = pow2(crate::expander::ceil_tol((c / (theta * theta)).min(2f64.powi(60))));
        ShiftedLayout { n, n_padded: pow2(n), big_n, xi: 1.0 / (32.0 * big_n as f64) }
    }

    /// Resolutions `i` with `log N <= i < log n_padded`.
    pub fn levels(&self) -> std::ops::Range<u32> {
        self.big_n.trailing_zeros()..self.n_padded.trailing_zeros()
    }

    /// `1 + (j-1)2^i/N - 2^i` for `j` in `1..=N`.
    pub fn shift(&self, i: u32, j: u64) -> i64 {
        let s = 1i64 << i;
        1 + ((j - 1) as i64 * s) / self.big_n as i64 - s
    }

    /// Half-open intervals `[Shift + k2^i, Shift + (k+1)2^i)` for
    /// `k = 0..=n_padded/2^i`, as closed ranges, unclipped.
    pub fn intervals(&self, i: u32, j: u64) -> Vec<IntervalBlock> {
        let s = 1i64 << i;
        let base = self.shift(i, j);
        (0..=(self.n_padded >> i) as i64).map(|k| IntervalBlock { lo: base + k * s, hi: base + (k + 1) * s - 1 }).collect()
    }

    /// `G_0` joins positions at distance at most `3N`.
    pub fn near_range(&self) -> u64 {
        3 * self.big_n
    }

    /// `G_0` alone is the complete graph.
    pub fn degenerate(&self) -> bool {
        self.near_range() + 1 >= self.n
    }

    /// Smallest `n` for which `G_0` is not complete.
    pub fn crossover_n(&self) -> u64 {
        self.near_range() + 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GThetaParams {
    pub theta: f64,
    pub c: f64,
    pub mode: Mode,
    /// Expander sampling constant; defaults to `⌈3/ξ²⌉` (faithful) or
    /// [`EXPERIMENTAL_DEGREE`].
    pub expander_constant: Option<u64>,
}

impl GThetaParams {
    pub fn faithful(theta: f64) -> Self {
        GThetaParams { theta, c: FAITHFUL_C, mode: Mode::Faithful, expander_constant: None }
    }

    pub fn experimental(theta: f64, c: f64) -> Self {
        GThetaParams { theta, c, mode: Mode::Experimental, expander_constant: None }
    }
}

#[derive(Debug, Clone)]
pub struct GTheta<T> {
    pub graph: WeightedGraph<T>,
    pub params: GThetaParams,
    pub layout: ShiftedLayout,
    pub expander_constant: u64,
    /// Sampled pairs plus `G_0` pairs, before deduplication.
    pub budget: u64,
    pub expanders: u64,
}

/// Shifted-interval spanner `G_θ` on positions `1..=n`.
pub fn build_g_theta<T: Scalar>(n: usize, params: GThetaParams, seed: u64) -> Result<GTheta<T>> {
    let GThetaParams { theta, c, mode, expander_constant } = params;
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid(format!("theta must lie in (0,1), got {theta}")));
    }
    if !(c > 0.0) {
        return Err(invalid("c must be positive"));
    }
    if mode == Mode::Faithful && (c < FAITHFUL_C || expander_constant.is_some()) {
        return Err(invalid(format!("faithful mode needs c >= {FAITHFUL_C} and no degree override")));
    }
    if expander_constant == Some(0) {
        return Err(invalid("degree constant override must be >= 1"));
    }
    let layout = ShiftedLayout::new(n as u64, theta, c);
    if layout.big_n >= n as u64 {
        log::warn!("N = {} >= n = {n}: G_θ degenerates toward G_0", layout.big_n);
    }
    let constant = expander_constant.unwrap_or(match mode {
        Mode::Faithful => bipartite_constant(layout.xi),
        Mode::Experimental => EXPERIMENTAL_DEGREE,
    });
    let reach = layout.near_range() as usize;
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..=(u + reach).min(n - 1) {
            pairs.push((u as u32, v as u32));
        }
    }
    let mut budget = pairs.len() as u64;
    let mut expanders = 0;
    if !layout.degenerate() {
        let key = StreamKey::root(seed).child(tags::G_THETA);
        for i in layout.levels() {
            for j in 1..=layout.big_n {
                let blocks: Vec<IntervalBlock> = layout.intervals(i, j).iter().map(|b| b.clip(n as u64)).collect();
                for (k, w) in blocks.windows(2).enumerate() {
                    if w[0].len() < 2 || w[1].len() < 2 {
                        continue;
                    }
                    let (a, b) = (w[0].ids(), w[1].ids());
                    budget += bipartite_budget(a.len(), b.len(), constant);
                    expanders += 1;
                    sample_bipartite(&a, &b, constant, key.path(&[i as u64, j, k as u64]), &mut pairs);
                }
            }
        }
    }
    Ok(GTheta { graph: WeightedGraph::line(n, pairs)?, params, layout, expander_constant: constant, budget, expanders })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactPath {
    pub vertices: Vec<usize>,
}

impl ExactPath {
    pub fn hops(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Fewest-hop monotone path from `s` to `t` in `g` minus `failed`. On the
/// line its length is exactly `|t - s|`.
pub fn find_exact_path<T: Scalar>(g: &WeightedGraph<T>, failed: &VertexSet, s: usize, t: usize) -> Option<ExactPath> {
    if s == t || failed.contains(s) || failed.contains(t) || s.max(t) >= g.n() {
        return None;
    }
    let (lo, hi) = (s.min(t), s.max(t));
    let mut prev = vec![usize::MAX; hi - lo + 1];
    let mut queue = VecDeque::from([lo]);
    prev[0] = lo;
    while let Some(u) = queue.pop_front() {
        if u == hi {
            break;
        }
        for &v in g.forward_neighbors(u) {
            let v = v as usize;
            if v > hi {
                break;
            }
            if prev[v - lo] == usize::MAX && !failed.contains(v) {
                prev[v - lo] = u;
                queue.push_back(v);
            }
        }
    }
    if prev[hi - lo] == usize::MAX {
        return None;
    }
    let mut path = vec![hi];
    while *path.last().unwrap() != lo {
        path.push(prev[path.last().unwrap() - lo]);
    }
    if s < t {
        path.reverse();
    }
    Some(ExactPath { vertices: path })
}
