//! Randomized expanders: the bipartite ξ-expander used by every spanner
//! construction, the strong (α, β) expander and the reliable-connectivity
//! graph built on top of it, plus exhaustive and sampled verification.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{component_sizes, VertexSet, WeightedGraph};
use crate::rng::{tags, StreamKey};
use crate::scalar::Scalar;

/// Largest side that exhaustive verification will enumerate.
pub const ENUMERATION_BUDGET: usize = 22;

/// Slack added to the coupon-collector bound `m ln m` before a sampling
/// vertex is connected to the whole opposite side. Missing any vertex past
/// this point has probability below `m * e^-40`.
const SATURATION_SLACK: f64 = 40.0;

/// `⌈x⌉`, tolerant to representation error just above an integer.
pub(crate) fn ceil_tol(x: f64) -> u64 {
    (x - 1e-9).ceil().max(0.0) as u64
}

/// Sampling constant `⌈3/ξ²⌉` of the bipartite construction.
pub fn bipartite_constant(xi: f64) -> u64 {
    ceil_tol(3.0 / (xi * xi))
}

/// Sampling constant `64⌈α/β⌉` of the strong expander.
pub fn strong_constant(alpha: u64, beta: f64) -> u64 {
    64 * ceil_tol(alpha as f64 / beta)
}

fn saturates(samples: u64, m: usize) -> bool {
    m <= 1 || samples as f64 >= m as f64 * ((m as f64).ln() + SATURATION_SLACK)
}

/// Per-side sample counts `c⌈n/|L|⌉` and `c⌈n/|R|⌉` with `n = |L| + |R|`.
pub fn bipartite_samples(left: usize, right: usize, constant: u64) -> (u64, u64) {
    let n = (left + right) as u64;
    (constant * n.div_ceil(left as u64), constant * n.div_ceil(right as u64))
}

/// Upper bound on the pairs emitted by [`sample_bipartite`].
pub fn bipartite_budget(left: usize, right: usize, constant: u64) -> u64 {
    let (sl, sr) = bipartite_samples(left, right, constant);
    sl * left as u64 + sr * right as u64
}

/// Draws the bipartite expander between `left` and `right` (vertex ids of the
/// host graph) and appends its pairs, as `(min, max)`, to `out`.
///
/// Every vertex samples with repetition from a private stream
/// `key / side / index`, so the result does not depend on call order.
pub fn sample_bipartite(left: &[u32], right: &[u32], constant: u64, key: StreamKey, out: &mut Vec<(u32, u32)>) {
    if left.is_empty() || right.is_empty() {
        return;
    }
    let (sl, sr) = bipartite_samples(left.len(), right.len(), constant);
    let mut mark = vec![false; left.len().max(right.len())];
    let mut touched = Vec::new();
    for (side, from, to, samples) in [
        (tags::SIDE_LEFT, left, right, sl),
        (tags::SIDE_RIGHT, right, left, sr),
    ] {
        let all = saturates(samples, to.len());
        for (i, &u) in from.iter().enumerate() {
            if all {
                out.extend(to.iter().map(|&v| (u.min(v), u.max(v))));
                continue;
            }
            let mut rng = key.path(&[side, i as u64]).rng();
            for _ in 0..samples {
                let j = rng.gen_range(0..to.len() as u64) as usize;
                if !mark[j] {
                    mark[j] = true;
                    touched.push(j);
                }
            }
            for &j in &touched {
                mark[j] = false;
                let v = to[j];
                out.push((u.min(v), u.max(v)));
            }
            touched.clear();
        }
    }
}

/// A bipartite expander on `0..left+right` with `L = 0..left`.
#[derive(Debug, Clone)]
pub struct BipartiteExpander<T> {
    pub graph: WeightedGraph<T>,
    pub left: usize,
    pub right: usize,
    pub xi: f64,
    pub constant: u64,
    pub samples_left: u64,
    pub samples_right: u64,
    /// The sampling constant was overridden; the expansion guarantee is void.
    pub experimental: bool,
    /// Builds tried before verification passed (1 when unverified).
    pub attempts: u32,
}

impl<T: Scalar> BipartiteExpander<T> {
    pub fn budget(&self) -> u64 {
        bipartite_budget(self.left, self.right, self.constant)
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if xi > 0.0 && xi < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("xi must lie in (0,1), got {xi}")))
    }
}

fn check_override(c: Option<u64>) -> Result<()> {
    if c == Some(0) {
        Err(invalid("degree constant override must be >= 1"))
    } else {
        Ok(())
    }
}

/// Bipartite ξ-expander between `L = 0..left` and `R = left..left+right`,
/// with unit placeholder weights.
pub fn build_bipartite_expander<T: Scalar>(
    left: usize,
    right: usize,
    xi: f64,
    seed: u64,
    constant_override: Option<u64>,
) -> Result<BipartiteExpander<T>> {
    bipartite_attempt(left, right, xi, StreamKey::root(seed).child(tags::BIPARTITE), constant_override)
}

fn bipartite_attempt<T: Scalar>(
    left: usize,
    right: usize,
    xi: f64,
    key: StreamKey,
    constant_override: Option<u64>,
) -> Result<BipartiteExpander<T>> {
    check_xi(xi)?;
    check_override(constant_override)?;
    if left == 0 || right == 0 {
        return Err(invalid("expander sides must be non-empty"));
    }
    let constant = constant_override.unwrap_or_else(|| bipartite_constant(xi));
    let l: Vec<u32> = (0..left as u32).collect();
    let r: Vec<u32> = (left as u32..(left + right) as u32).collect();
    let mut pairs = Vec::new();
    sample_bipartite(&l, &r, constant, key, &mut pairs);
    let graph = WeightedGraph::from_pairs(left + right, pairs, |_, _| T::one())?;
    let (samples_left, samples_right) = bipartite_samples(left, right, constant);
    Ok(BipartiteExpander {
        graph,
        left,
        right,
        xi,
        constant,
        samples_left,
        samples_right,
        experimental: constant_override.is_some(),
        attempts: 1,
    })
}

/// How a freshly built expander is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "subsets")]
pub enum Verification {
    None,
    Exhaustive,
    /// Random subsets per side.
    Sampled(u32),
}

/// Rebuilds with stream `seed / resample / attempt` until verification passes,
/// at most `max_attempts` times. Attempt 0 is the plain build.
pub fn build_bipartite_verified<T: Scalar>(
    left: usize,
    right: usize,
    xi: f64,
    seed: u64,
    constant_override: Option<u64>,
    verification: Verification,
    max_attempts: u32,
) -> Result<(BipartiteExpander<T>, ExpansionCheck)> {
    let base = StreamKey::root(seed).child(tags::BIPARTITE);
    let mut last = None;
    for attempt in 0..max_attempts.max(1) {
        let key = if attempt == 0 { base } else { base.path(&[tags::RESAMPLE, attempt as u64]) };
        let mut ex = bipartite_attempt::<T>(left, right, xi, key, constant_override)?;
        ex.attempts = attempt + 1;
        let check = match verification {
            Verification::None => ExpansionCheck::passed(),
            Verification::Exhaustive => verify_expansion_bruteforce(&ex.graph, left, xi)?,
            Verification::Sampled(k) => verify_expansion_sampled(&ex.graph, left, xi, k, key.child(tags::PAIRS)),
        };
        if check.pass {
            return Ok((ex, check));
        }
        last = Some((ex, check));
    }
    Ok(last.expect("at least one attempt"))
}

/// Which side of the bipartition a violating subset lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub side: Side,
    /// Vertex ids of the subset (host graph ids).
    pub subset: Vec<usize>,
    pub neighborhood: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub pass: bool,
    pub violation: Option<Violation>,
    pub subsets_checked: u64,
}

impl ExpansionCheck {
    fn passed() -> Self {
        ExpansionCheck { pass: true, violation: None, subsets_checked: 0 }
    }
}

/// Smallest subset size `k` with `k >= ξ s`.
fn min_subset(xi: f64, s: usize) -> usize {
    (ceil_tol(xi * s as f64) as usize).max(1)
}

/// Smallest neighborhood size strictly above `(1-ξ) s`.
fn required_neighborhood(xi: f64, s: usize) -> usize {
    ((1.0 - xi) * s as f64 + 1e-9).floor() as usize + 1
}

fn bitset_rows<T: Scalar>(g: &WeightedGraph<T>, from: std::ops::Range<usize>, to: std::ops::Range<usize>) -> Vec<Vec<u64>> {
    let words = (to.len() + 63) / 64;
    from.map(|u| {
        let mut row = vec![0u64; words];
        for &v in g.neighbor_ids(u) {
            let v = v as usize;
            if to.contains(&v) {
                let j = v - to.start;
                row[j / 64] |= 1 << (j % 64);
            }
        }
        row
    })
    .collect()
}

/// Exhaustive check of both expansion properties of a bipartite graph whose
/// left side is `0..left` and right side `left..n`.
///
/// Neighborhoods only grow with the subset, so subsets of the minimum allowed
/// size suffice. Property (I) on `L` fails exactly when (II) on `R` fails (the
/// complement of a small neighborhood is a large subset with a small
/// neighborhood on the other side), so only the smaller side is enumerated.
pub fn verify_expansion_bruteforce<T: Scalar>(g: &WeightedGraph<T>, left: usize, xi: f64) -> Result<ExpansionCheck> {
    check_xi(xi)?;
    let right = g.n() - left;
    let small = left.min(right);
    if small > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget(small, ENUMERATION_BUDGET));
    }
    let (side, from, to, base) = if left <= right {
        (Side::Left, 0..left, left..g.n(), 0)
    } else {
        (Side::Right, left..g.n(), 0..left, left)
    };
    let s = from.len();
    let k = min_subset(xi, s);
    let need = required_neighborhood(xi, to.len());
    let rows = bitset_rows(g, from, to);
    let words = rows.first().map_or(0, |r| r.len());
    let mut acc = vec![0u64; words];
    let mut checked = 0u64;
    let mut mask: u64 = (1u64 << k) - 1;
    let limit = 1u64 << s;
    while mask < limit {
        acc.iter_mut().for_each(|w| *w = 0);
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for (a, r) in acc.iter_mut().zip(&rows[i]) {
                *a |= r;
            }
        }
        checked += 1;
        let nb: usize = acc.iter().map(|w| w.count_ones() as usize).sum();
        if nb < need {
            let subset = (0..s).filter(|&i| mask >> i & 1 == 1).map(|i| i + base).collect();
            return Ok(ExpansionCheck {
                pass: false,
                violation: Some(Violation { side, subset, neighborhood: nb }),
                subsets_checked: checked,
            });
        }
        // Gosper's hack: next subset with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    Ok(ExpansionCheck { pass: true, violation: None, subsets_checked: checked })
}

/// Spot-check of both expansion properties with `per_side` random subsets of
/// minimum allowed size on each side.
pub fn verify_expansion_sampled<T: Scalar>(
    g: &WeightedGraph<T>,
    left: usize,
    xi: f64,
    per_side: u32,
    key: StreamKey,
) -> ExpansionCheck {
    let mut rng = key.rng();
    let mut checked = 0;
    for (side, from, to) in [(Side::Left, 0..left, left..g.n()), (Side::Right, left..g.n(), 0..left)] {
        let s = from.len();
        if s == 0 {
            continue;
        }
        let k = min_subset(xi, s);
        let need = required_neighborhood(xi, to.len());
        let mut seen = vec![false; g.n()];
        for _ in 0..per_side {
            checked += 1;
            let subset: Vec<usize> = sample_indices(&mut rng, s, k).into_iter().map(|i| i + from.start).collect();
            let mut nb = 0;
            for &u in &subset {
                for &v in g.neighbor_ids(u) {
                    let v = v as usize;
                    if to.contains(&v) && !seen[v] {
                        seen[v] = true;
                        nb += 1;
                    }
                }
            }
            seen.iter_mut().for_each(|b| *b = false);
            if nb < need {
                let mut subset = subset;
                subset.sort_unstable();
                return ExpansionCheck {
                    pass: false,
                    violation: Some(Violation { side, subset, neighborhood: nb }),
                    subsets_checked: checked,
                };
            }
        }
    }
    ExpansionCheck { pass: true, violation: None, subsets_checked: checked }
}

/// A graph on `0..n` with `|N(X)| >= min((1-β)n, α|X|)` for every `X`.
#[derive(Debug, Clone)]
pub struct StrongExpander<T> {
    pub graph: WeightedGraph<T>,
    pub alpha: u64,
    pub beta: f64,
    pub constant: u64,
    pub experimental: bool,
    pub attempts: u32,
}

impl<T: Scalar> StrongExpander<T> {
    /// Sampling budget `c n`.
    pub fn budget(&self) -> u64 {
        self.constant * self.graph.n() as u64
    }
}

pub fn build_strong_expander<T: Scalar>(
    n: usize,
    alpha: u64,
    beta: f64,
    seed: u64,
    constant_override: Option<u64>,
) -> Result<StrongExpander<T>> {
    strong_attempt(n, alpha, beta, StreamKey::root(seed).child(tags::STRONG), constant_override)
}

fn strong_attempt<T: Scalar>(
    n: usize,
    alpha: u64,
    beta: f64,
    key: StreamKey,
    constant_override: Option<u64>,
) -> Result<StrongExpander<T>> {
    if n < 2 {
        return Err(invalid("strong expander needs n >= 2"));
    }
    if alpha < 2 {
        return Err(invalid(format!("alpha must be an integer > 1, got {alpha}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0,1), got {beta}")));
    }
    check_override(constant_override)?;
    let constant = constant_override.unwrap_or_else(|| strong_constant(alpha, beta));
    let mut pairs = Vec::new();
    if saturates(constant, n) {
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                pairs.push((u, v));
            }
        }
    } else {
        for u in 0..n as u32 {
            let mut rng = key.child(u as u64).rng();
            for _ in 0..constant {
                let v = rng.gen_range(0..n as u64) as u32;
                pairs.push((u.min(v), u.max(v)));
            }
        }
    }
    let graph = WeightedGraph::from_pairs(n, pairs, |_, _| T::one())?;
    Ok(StrongExpander {
        graph,
        alpha,
        beta,
        constant,
        experimental: constant_override.is_some(),
        attempts: 1,
    })
}

/// Strong expander rebuilt until the exhaustive check passes (`n <= 22`).
pub fn build_strong_verified<T: Scalar>(
    n: usize,
    alpha: u64,
    beta: f64,
    seed: u64,
    constant_override: Option<u64>,
    max_attempts: u32,
) -> Result<(StrongExpander<T>, StrongCheck)> {
    let base = StreamKey::root(seed).child(tags::STRONG);
    let mut last = None;
    for attempt in 0..max_attempts.max(1) {
        let key = if attempt == 0 { base } else { base.path(&[tags::RESAMPLE, attempt as u64]) };
        let mut ex = strong_attempt::<T>(n, alpha, beta, key, constant_override)?;
        ex.attempts = attempt + 1;
        let check = verify_strong_bruteforce(&ex.graph, alpha, beta)?;
        if check.pass {
            return Ok((ex, check));
        }
        last = Some((ex, check));
    }
    Ok(last.expect("at least one attempt"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongCheck {
    pub pass: bool,
    pub violation: Option<Vec<usize>>,
    pub subsets_checked: u64,
}

/// Checks `|N(X)| >= min((1-β)n, α|X|)` over all `2^n` subsets.
pub fn verify_strong_bruteforce<T: Scalar>(g: &WeightedGraph<T>, alpha: u64, beta: f64) -> Result<StrongCheck> {
    let n = g.n();
    if n > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget(n, ENUMERATION_BUDGET));
    }
    let nbr: Vec<u32> = (0..n)
        .map(|u| g.neighbor_ids(u).iter().fold(0u32, |m, &v| m | 1 << v))
        .collect();
    let cap = (1.0 - beta) * n as f64;
    let total = 1usize << n;
    let mut hood = vec![0u32; total];
    for x in 1..total {
        let low = x.trailing_zeros() as usize;
        hood[x] = hood[x & (x - 1)] | nbr[low];
        let size = x.count_ones() as f64;
        let target = cap.min(alpha as f64 * size);
        if (hood[x].count_ones() as f64) < target - 1e-9 {
            let subset = (0..n).filter(|&i| x >> i & 1 == 1).collect();
            return Ok(StrongCheck { pass: false, violation: Some(subset), subsets_checked: x as u64 });
        }
    }
    Ok(StrongCheck { pass: true, violation: None, subsets_checked: total as u64 - 1 })
}

/// Parameters `α = ⌈100/θ⌉`, `β = θ/α` of the reliable-connectivity graph.
pub fn reliable_parameters(theta: f64) -> Result<(u64, f64)> {
    if !(theta > 0.0 && theta < 0.5) {
        return Err(invalid(format!("theta must lie in (0, 1/2), got {theta}")));
    }
    let alpha = ceil_tol(100.0 / theta);
    Ok((alpha, theta / alpha as f64))
}

/// θ-reliable connectivity graph: for every `B`, `G \ B` keeps a component of
/// size at least `n - (1+θ)|B|`.
pub fn build_reliable_connectivity<T: Scalar>(
    n: usize,
    theta: f64,
    seed: u64,
    constant_override: Option<u64>,
) -> Result<StrongExpander<T>> {
    let (alpha, beta) = reliable_parameters(theta)?;
    build_strong_expander(n, alpha, beta, seed, constant_override)
}

/// Largest component of `G \ B` and the target `n - (1+θ)|B|`.
pub fn connectivity_after_failures<T: Scalar>(g: &WeightedGraph<T>, failed: &VertexSet, theta: f64) -> (usize, f64) {
    let alive = failed.complement_mask(g.n());
    let largest = component_sizes(g, &alive).first().copied().unwrap_or(0);
    (largest, g.n() as f64 - (1.0 + theta) * failed.len() as f64)
}
