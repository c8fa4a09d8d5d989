//! Failure attacks, harmed-set certification and loss curves.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::euclidean::{hd_harmed_set, quadtree_gamma, BoundedSpreadSpanner, HdSpanner, Regime, Variant};
use crate::expander::{connectivity_after_failures, StrongExpander};
use crate::graph::{shortest_path_length, VertexSet, WeightedGraph};
use crate::lso::build_ordering_family_with;
use crate::points::PointSet;
use crate::quadtree::Quadtree;
use crate::ratio::Threshold;
use crate::rng::{tags, StreamKey};
use crate::scalar::Scalar;
use crate::shadow::{shadow_1d, shadow_quadtree};
use crate::spanner1d::{GTheta, HSpanner, Mode};

pub const REPORT_VERSION: u32 = 1;

/// Above this many vertices, pairs are sampled instead of enumerated.
pub const ALL_PAIRS_LIMIT: usize = 2048;

pub const DEFAULT_PAIR_BUDGET: u64 = 1_000_000;

/// Constant of the harmed-set bound `200|B|` for the block-tree spanner.
pub const H_BOUND_FACTOR: f64 = 200.0;

/// What was built, with the parameters its harmed-set recipe needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Construction {
    #[serde(rename = "1d-const")]
    BlockTree { n: usize, xi: f64, constant: u64, experimental: bool },
    #[serde(rename = "1d-theta")]
    ShiftedIntervals { n: usize, theta: f64, c: f64, mode: Mode, big_n: u64, expander_constant: u64 },
    Hd {
        n: usize,
        d: usize,
        epsilon: f64,
        theta: f64,
        variant: Variant,
        sigma: f64,
        extra_bits: u32,
        m: usize,
        iterations: u32,
        theta_prime: f64,
        regime: Regime,
        experimental: bool,
    },
    BoundedSpread { n: usize, d: usize, epsilon: f64, theta: f64, xi: f64, constant: u64, experimental: bool },
    Reliable { n: usize, theta: f64, alpha: u64, beta: f64, constant: u64, experimental: bool },
}

impl Construction {
    pub fn of_h<T: Scalar>(h: &HSpanner<T>) -> Self {
        Construction::BlockTree { n: h.graph.n(), xi: h.xi, constant: h.constant, experimental: h.experimental }
    }

    pub fn of_g_theta<T: Scalar>(g: &GTheta<T>) -> Self {
        Construction::ShiftedIntervals {
            n: g.graph.n(),
            theta: g.params.theta,
            c: g.params.c,
            mode: g.params.mode,
            big_n: g.layout.big_n,
            expander_constant: g.expander_constant,
        }
    }

    pub fn of_hd<T: Scalar>(s: &HdSpanner<T>, d: usize) -> Self {
        Construction::Hd {
            n: s.graph.n(),
            d,
            epsilon: s.config.epsilon,
            theta: s.config.theta,
            variant: s.config.variant,
            sigma: s.params.sigma,
            extra_bits: s.config.extra_bits,
            m: s.params.m,
            iterations: s.params.iterations,
            theta_prime: s.params.theta_prime,
            regime: s.regime,
            experimental: s.config.is_experimental(),
        }
    }

    pub fn of_bounded_spread<T: Scalar>(s: &BoundedSpreadSpanner<T>, d: usize, epsilon: f64, theta: f64) -> Self {
        Construction::BoundedSpread {
            n: s.graph.n(),
            d,
            epsilon,
            theta,
            xi: s.xi,
            constant: s.constant,
            experimental: s.experimental,
        }
    }

    pub fn of_reliable<T: Scalar>(s: &StrongExpander<T>, theta: f64) -> Self {
        Construction::Reliable {
            n: s.graph.n(),
            theta,
            alpha: s.alpha,
            beta: s.beta,
            constant: s.constant,
            experimental: s.experimental,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Construction::BlockTree { n, .. }
            | Construction::ShiftedIntervals { n, .. }
            | Construction::Hd { n, .. }
            | Construction::BoundedSpread { n, .. }
            | Construction::Reliable { n, .. } => n,
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, Construction::BlockTree { .. } | Construction::ShiftedIntervals { .. })
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Construction::Hd { .. } | Construction::BoundedSpread { .. })
    }

    /// `|B⁺| <= factor · |B|`.
    pub fn bound_factor(&self) -> f64 {
        match *self {
            Construction::BlockTree { .. } => H_BOUND_FACTOR,
            Construction::ShiftedIntervals { theta, .. }
            | Construction::Hd { theta, .. }
            | Construction::BoundedSpread { theta, .. }
            | Construction::Reliable { theta, .. } => 1.0 + theta,
        }
    }

    fn epsilon(&self) -> f64 {
        match *self {
            Construction::Hd { epsilon, .. } | Construction::BoundedSpread { epsilon, .. } => epsilon,
            _ => 0.0,
        }
    }
}

/// Shadow threshold used for the block-tree spanner (a third of `1/32`).
pub fn h_shadow_threshold() -> Threshold {
    Threshold::new(1, 96).expect("constant threshold")
}

/// Shadow threshold `1 − θ/4` of the shifted-interval spanner.
pub fn g_theta_threshold(theta: f64) -> Result<Threshold> {
    Threshold::from_f64(1.0 - theta / 4.0)
}

/// Harmed set `B⁺` prescribed for the construction.
pub fn harmed_set<T: Scalar>(meta: &Construction, bad: &VertexSet, points: Option<&PointSet<T>>) -> Result<VertexSet> {
    let n = meta.n();
    let need_points = || points.ok_or_else(|| invalid("this construction needs its point set"));
    let mut out = match *meta {
        Construction::BlockTree { .. } => shadow_1d(n, bad, h_shadow_threshold())?.members,
        Construction::ShiftedIntervals { theta, .. } => shadow_1d(n, bad, g_theta_threshold(theta)?)?.members,
        Construction::BoundedSpread { theta, .. } => {
            let tree = Quadtree::build(need_points()?)?;
            shadow_quadtree(&tree, bad, quadtree_gamma(theta)?).members
        }
        Construction::Hd { d, sigma, extra_bits, m, theta_prime, iterations, .. } => {
            let family = build_ordering_family_with(d, sigma, extra_bits)?;
            if family.len() != m {
                return Err(invalid(format!("ordering family has {} members, build recorded {m}", family.len())));
            }
            hd_harmed_set(need_points()?, &family, bad, theta_prime, iterations)?
        }
        Construction::Reliable { .. } => bad.clone(),
    };
    out = out.union(bad);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    RandomK,
    Interval,
    Prefix,
    Ball,
    GreedyShadow,
}

impl std::str::FromStr for AttackKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random-k" | "random" => AttackKind::RandomK,
            "interval" => AttackKind::Interval,
            "prefix" => AttackKind::Prefix,
            "ball" => AttackKind::Ball,
            "greedy-shadow" | "greedy" => AttackKind::GreedyShadow,
            _ => return Err(invalid(format!("unknown attack kind {s}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub k: usize,
    pub seed: u64,
}

/// Greedy candidates examined per step when `n` exceeds this.
const GREEDY_FULL_SCAN: usize = 1024;
const GREEDY_SAMPLE: usize = 256;

/// Failure set of exactly `k` vertices.
pub fn generate_attack<T: Scalar>(
    spec: &AttackSpec,
    meta: &Construction,
    points: Option<&PointSet<T>>,
) -> Result<VertexSet> {
    let n = meta.n();
    let k = spec.k;
    if k > n {
        return Err(invalid(format!("attack size {k} exceeds n = {n}")));
    }
    let mut rng = StreamKey::root(spec.seed).child(tags::ATTACK).rng();
    Ok(match spec.kind {
        AttackKind::Prefix => (0..k).collect(),
        AttackKind::RandomK => rand::seq::index::sample(&mut rng, n, k).into_iter().collect(),
        AttackKind::Interval => {
            let start = rng.gen_range(0..=(n - k) as u64) as usize;
            (start..start + k).collect()
        }
        AttackKind::Ball => {
            let c = rng.gen_range(0..n as u64) as usize;
            let mut ids: Vec<usize> = (0..n).collect();
            match points.filter(|_| !meta.is_line()) {
                Some(ps) => ids.sort_by(|&a, &b| ps.dist(c, a).partial_cmp(&ps.dist(c, b)).unwrap().then(a.cmp(&b))),
                None => ids.sort_by_key(|&a| (a.abs_diff(c), a)),
            }
            ids.truncate(k);
            VertexSet::new(ids)
        }
        AttackKind::GreedyShadow => greedy_shadow(meta, points, k, &mut rng)?,
    })
}

fn greedy_shadow<T: Scalar, R: Rng>(meta: &Construction, points: Option<&PointSet<T>>, k: usize, rng: &mut R) -> Result<VertexSet> {
    let n = meta.n();
    let tree = match meta {
        Construction::BoundedSpread { .. } | Construction::Hd { .. } => {
            Some(Quadtree::build(points.ok_or_else(|| invalid("greedy attack needs the point set"))?)?)
        }
        _ => None,
    };
    let objective = |b: &VertexSet| -> Result<usize> {
        Ok(match (meta, &tree) {
            (Construction::BoundedSpread { theta, .. }, Some(t)) => shadow_quadtree(t, b, quadtree_gamma(*theta)?).len(),
            (Construction::Hd { .. }, Some(t)) => shadow_quadtree(t, b, Threshold::new(1, 2)?).len(),
            (Construction::ShiftedIntervals { theta, .. }, _) => shadow_1d(n, b, g_theta_threshold(*theta)?)?.len(),
            (Construction::Reliable { .. }, _) => b.len(),
            _ => shadow_1d(n, b, h_shadow_threshold())?.len(),
        })
    };
    let mut chosen: Vec<usize> = Vec::new();
    let mut current = VertexSet::empty();
    for _ in 0..k {
        let mut pool: Vec<usize> = (0..n).filter(|v| !current.contains(*v)).collect();
        pool.shuffle(rng);
        if n > GREEDY_FULL_SCAN {
            pool.truncate(GREEDY_SAMPLE);
        }
        let mut best = (0, pool[0]);
        if objective(&current)? == n {
            // Saturated: every choice ties.
            chosen.push(best.1);
            current = VertexSet::new(chosen.clone());
            continue;
        }
        for &v in &pool {
            let mut trial = chosen.clone();
            trial.push(v);
            let score = objective(&VertexSet::new(trial))?;
            if score > best.0 {
                best = (score, v);
            }
        }
        chosen.push(best.1);
        current = VertexSet::new(chosen.clone());
    }
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub pair_budget: u64,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { pair_budget: DEFAULT_PAIR_BUDGET, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub report_version: u32,
    pub construction: Construction,
    pub attack: Option<AttackSpec>,
    pub failed: usize,
    pub harmed: VertexSet,
    pub harmed_size: usize,
    pub bound: f64,
    pub bound_holds: bool,
    pub pairs_checked: u64,
    pub pairs_sampled: bool,
    pub pair_seed: u64,
    /// Failing pairs with both ends outside `B⁺`.
    pub failing_outside: u64,
    pub failing_examples: Vec<(usize, usize)>,
    /// Failing pairs among all survivors.
    pub failing_total: u64,
    /// `|B⁺| − |B|`.
    pub certified_loss: usize,
    /// Greedy maximal matching of failing pairs: a lower bound on the
    /// smallest set of survivors whose removal fixes every failing pair.
    pub loss_lower_bound: usize,
    pub max_stretch: Option<f64>,
    pub max_hops: Option<usize>,
    pub largest_component: Option<usize>,
    pub runtime_ms: u128,
    pub pass: bool,
}

struct PairAudit {
    checked: u64,
    sampled: bool,
    failing_outside: u64,
    examples: Vec<(usize, usize)>,
    failing_total: u64,
    matching: usize,
    max_stretch: Option<f64>,
    max_hops: Option<usize>,
}

struct Bits {
    words: usize,
    data: Vec<u64>,
}

impl Bits {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Bits { words, data: vec![0; words * n] }
    }

    fn row(&self, s: usize) -> &[u64] {
        &self.data[s * self.words..(s + 1) * self.words]
    }

    fn get(&self, s: usize, t: usize) -> bool {
        self.data[s * self.words + t / 64] >> (t % 64) & 1 == 1
    }

    fn set(&mut self, s: usize, t: usize) {
        self.data[s * self.words + t / 64] |= 1 << (t % 64);
    }

    fn or_into(&mut self, dst: usize, src: usize) {
        let w = self.words;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&mut lo[dst * w..dst * w + w], &hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&mut hi[..w], &lo[src * w..src * w + w])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x |= *y;
        }
    }
}

/// Above this many vertices the 1D audit samples pairs.
const LINE_BITSET_LIMIT: usize = 16384;

fn line_audit<T: Scalar>(g: &WeightedGraph<T>, alive: &[bool], outside: &[bool]) -> PairAudit {
    let n = g.n();
    let mut reach = Bits::new(n);
    for s in (0..n).rev().filter(|&s| alive[s]) {
        for &v in g.forward_neighbors(s) {
            let v = v as usize;
            if alive[v] {
                reach.set(s, v);
                reach.or_into(s, v);
            }
        }
    }
    let mut audit = PairAudit {
        checked: 0,
        sampled: false,
        failing_outside: 0,
        examples: Vec::new(),
        failing_total: 0,
        matching: 0,
        max_stretch: None,
        max_hops: None,
    };
    let mut matched = vec![false; n];
    for s in (0..n).filter(|&s| alive[s]) {
        for t in (s + 1..n).filter(|&t| alive[t]) {
            let ok = reach.get(s, t);
            if outside[s] && outside[t] {
                audit.checked += 1;
                if !ok {
                    audit.failing_outside += 1;
                    if audit.examples.len() < 10 {
                        audit.examples.push((s, t));
                    }
                }
            }
            if !ok {
                audit.failing_total += 1;
                if !matched[s] && !matched[t] {
                    matched[s] = true;
                    matched[t] = true;
                    audit.matching += 1;
                }
            }
        }
    }
    if audit.checked > 0 {
        audit.max_stretch = Some(1.0);
        audit.max_hops = Some(max_hops(g, alive, outside, &reach));
    }
    audit
}

/// Largest fewest-hop count over connected pairs outside the harmed set.
fn max_hops<T: Scalar>(g: &WeightedGraph<T>, alive: &[bool], outside: &[bool], reach: &Bits) -> usize {
    let n = g.n();
    let mut cur = Bits::new(n);
    for s in (0..n).filter(|&s| alive[s]) {
        for &v in g.forward_neighbors(s) {
            if alive[v as usize] {
                cur.set(s, v as usize);
            }
        }
    }
    let mut mask = vec![0u64; reach.words];
    for t in (0..n).filter(|&t| alive[t] && outside[t]) {
        mask[t / 64] |= 1 << (t % 64);
    }
    let covered = |cur: &Bits| {
        (0..n).filter(|&s| alive[s] && outside[s]).all(|s| {
            reach.row(s).iter().zip(cur.row(s)).zip(&mask).all(|((r, c), m)| r & m & !c == 0)
        })
    };
    let mut hops = 1;
    while !covered(&cur) {
        let mut next = Bits::new(n);
        for s in (0..n).filter(|&s| alive[s]) {
            let w = next.words;
            next.data[s * w..(s + 1) * w].copy_from_slice(cur.row(s));
            for &v in g.forward_neighbors(s) {
                let v = v as usize;
                if alive[v] {
                    for (x, y) in next.data[s * w..(s + 1) * w].iter_mut().zip(cur.row(v)) {
                        *x |= *y;
                    }
                }
            }
        }
        cur = next;
        hops += 1;
    }
    hops
}

fn sampled_line_audit<T: Scalar>(g: &WeightedGraph<T>, bad: &VertexSet, outside: &[bool], budget: u64, seed: u64) -> PairAudit {
    let ids: Vec<usize> = (0..g.n()).filter(|&v| outside[v]).collect();
    let mut rng = StreamKey::root(seed).child(tags::PAIRS).rng();
    let mut audit = PairAudit {
        checked: 0,
        sampled: true,
        failing_outside: 0,
        examples: Vec::new(),
        failing_total: 0,
        matching: 0,
        max_stretch: None,
        max_hops: None,
    };
    let mut matched = vec![false; g.n()];
    if ids.len() < 2 {
        return audit;
    }
    for _ in 0..budget {
        let (a, b) = (ids[rng.gen_range(0..ids.len())], ids[rng.gen_range(0..ids.len())]);
        if a == b {
            continue;
        }
        audit.checked += 1;
        match crate::spanner1d::find_exact_path(g, bad, a.min(b), a.max(b)) {
            Some(p) => {
                audit.max_hops = Some(audit.max_hops.unwrap_or(0).max(p.hops()));
                audit.max_stretch = Some(1.0);
            }
            None => {
                audit.failing_outside += 1;
                audit.failing_total += 1;
                if audit.examples.len() < 10 {
                    audit.examples.push((a.min(b), a.max(b)));
                }
                if !matched[a] && !matched[b] {
                    matched[a] = true;
                    matched[b] = true;
                    audit.matching += 1;
                }
            }
        }
    }
    audit
}

fn euclid_audit<T: Scalar>(
    g: &WeightedGraph<T>,
    points: &PointSet<T>,
    alive: &[bool],
    outside: &[bool],
    epsilon: f64,
    budget: u64,
    seed: u64,
) -> Result<PairAudit> {
    let n = g.n();
    let limit = (1.0 + epsilon) * (1.0 + 1e-9);
    let mut audit = PairAudit {
        checked: 0,
        sampled: false,
        failing_outside: 0,
        examples: Vec::new(),
        failing_total: 0,
        matching: 0,
        max_stretch: None,
        max_hops: None,
    };
    let mut matched = vec![false; n];
    let mut record = |audit: &mut PairAudit, s: usize, t: usize, d: f64| {
        let ratio = d / points.dist(s, t).as_f64();
        let both_out = outside[s] && outside[t];
        if both_out {
            audit.checked += 1;
            audit.max_stretch = Some(audit.max_stretch.unwrap_or(1.0).max(ratio));
        }
        if !(ratio <= limit) {
            audit.failing_total += 1;
            if both_out {
                audit.failing_outside += 1;
                if audit.examples.len() < 10 {
                    audit.examples.push((s, t));
                }
            }
            if !matched[s] && !matched[t] {
                matched[s] = true;
                matched[t] = true;
                audit.matching += 1;
            }
        }
    };
    let survivors: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    if survivors.len() <= ALL_PAIRS_LIMIT {
        for &s in &survivors {
            let dist = shortest_path_length(g, alive, s)?;
            for &t in survivors.iter().filter(|&&t| t > s) {
                record(&mut audit, s, t, dist[t].as_f64());
            }
        }
        return Ok(audit);
    }
    audit.sampled = true;
    let ids: Vec<usize> = survivors.iter().copied().filter(|&v| outside[v]).collect();
    if ids.len() < 2 {
        return Ok(audit);
    }
    let mut rng = StreamKey::root(seed).child(tags::PAIRS).rng();
    let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); n];
    for _ in 0..budget {
        let (a, b) = (ids[rng.gen_range(0..ids.len())], ids[rng.gen_range(0..ids.len())]);
        if a != b {
            by_source[a.min(b)].push(a.max(b));
        }
    }
    for (s, targets) in by_source.iter().enumerate().filter(|(_, t)| !t.is_empty()) {
        let dist = shortest_path_length(g, alive, s)?;
        for &t in targets {
            record(&mut audit, s, t, dist[t].as_f64());
        }
    }
    Ok(audit)
}

/// Computes `B⁺`, checks `|B⁺| <= factor·|B|`, and audits every pair (or a
/// sample of `pair_budget` pairs) of survivors outside `B⁺`.
pub fn certify<T: Scalar>(
    g: &WeightedGraph<T>,
    meta: &Construction,
    bad: &VertexSet,
    points: Option<&PointSet<T>>,
    options: CertifyOptions,
) -> Result<ReliabilityReport> {
    let start = Instant::now();
    let n = meta.n();
    if g.n() != n {
        return Err(invalid(format!("graph has {} vertices, construction says {n}", g.n())));
    }
    let bad = bad.clone().within(n)?;
    let alive = bad.complement_mask(n);
    let (harmed, audit, largest) = if let Construction::Reliable { theta, .. } = *meta {
        let (largest, _) = connectivity_after_failures(g, &bad, theta);
        let harmed = largest_component_complement(g, &alive);
        (harmed, None, Some(largest))
    } else {
        let harmed = harmed_set(meta, &bad, points)?;
        let outside: Vec<bool> = (0..n).map(|v| alive[v] && !harmed.contains(v)).collect();
        let audit = if meta.is_line() {
            if n <= LINE_BITSET_LIMIT {
                line_audit(g, &alive, &outside)
            } else {
                sampled_line_audit(g, &bad, &outside, options.pair_budget, options.seed)
            }
        } else {
            let ps = points.ok_or_else(|| invalid("euclidean certification needs the point set"))?;
            euclid_audit(g, ps, &alive, &outside, meta.epsilon(), options.pair_budget, options.seed)?
        };
        (harmed, Some(audit), None)
    };
    let bound = meta.bound_factor() * bad.len() as f64;
    let bound_holds = harmed.len() as f64 <= bound + 1e-9;
    let failing_outside = audit.as_ref().map_or(0, |a| a.failing_outside);
    Ok(ReliabilityReport {
        report_version: REPORT_VERSION,
        construction: meta.clone(),
        attack: None,
        failed: bad.len(),
        harmed_size: harmed.len(),
        certified_loss: harmed.len() - bad.len(),
        harmed,
        bound,
        bound_holds,
        pairs_checked: audit.as_ref().map_or(0, |a| a.checked),
        pairs_sampled: audit.as_ref().is_some_and(|a| a.sampled),
        pair_seed: options.seed,
        failing_outside,
        failing_examples: audit.as_ref().map_or(Vec::new(), |a| a.examples.clone()),
        failing_total: audit.as_ref().map_or(0, |a| a.failing_total),
        loss_lower_bound: audit.as_ref().map_or(0, |a| a.matching),
        max_stretch: audit.as_ref().and_then(|a| a.max_stretch),
        max_hops: audit.as_ref().and_then(|a| a.max_hops),
        largest_component: largest,
        runtime_ms: start.elapsed().as_millis(),
        pass: bound_holds && failing_outside == 0,
    })
}

/// Everything outside one largest component of the survivors (failures
/// included).
fn largest_component_complement<T: Scalar>(g: &WeightedGraph<T>, alive: &[bool]) -> VertexSet {
    let n = g.n();
    let mut comp = vec![usize::MAX; n];
    let mut best = (0, usize::MAX);
    for s in 0..n {
        if !alive[s] || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = s;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in g.neighbor_ids(u) {
                let v = v as usize;
                if alive[v] && comp[v] == usize::MAX {
                    comp[v] = s;
                    stack.push(v);
                }
            }
        }
        if size > best.0 {
            best = (size, s);
        }
    }
    (0..n).filter(|&v| comp[v] != best.1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossRow {
    pub k: usize,
    pub trials: usize,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub mean_loss: f64,
    pub max_loss: usize,
    pub mean_loss_lower_bound: f64,
    pub max_stretch: f64,
    pub passes: usize,
}

/// Runs `trials` attacks of each size and aggregates `|B⁺|/k`, the
/// certified loss and the stretch.
pub fn loss_curve<T: Scalar>(
    g: &WeightedGraph<T>,
    meta: &Construction,
    points: Option<&PointSet<T>>,
    kind: AttackKind,
    ks: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<LossRow>> {
    let mut rows = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        let mut row = LossRow {
            k,
            trials,
            mean_ratio: 0.0,
            max_ratio: 0.0,
            mean_loss: 0.0,
            max_loss: 0,
            mean_loss_lower_bound: 0.0,
            max_stretch: 1.0,
            passes: 0,
        };
        for t in 0..trials {
            let attack_seed = StreamKey::root(seed).path(&[ki as u64, t as u64]).value();
            let spec = AttackSpec { kind, k, seed: attack_seed };
            let bad = generate_attack(&spec, meta, points)?;
            let report = certify(g, meta, &bad, points, CertifyOptions { seed: attack_seed, ..Default::default() })?;
            let ratio = if k == 0 { 0.0 } else { report.harmed_size as f64 / k as f64 };
            row.mean_ratio += ratio / trials as f64;
            row.max_ratio = row.max_ratio.max(ratio);
            row.mean_loss += report.certified_loss as f64 / trials as f64;
            row.max_loss = row.max_loss.max(report.certified_loss);
            row.mean_loss_lower_bound += report.loss_lower_bound as f64 / trials as f64;
            row.max_stretch = row.max_stretch.max(report.max_stretch.unwrap_or(1.0));
            row.passes += report.pass as usize;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn loss_curve_csv(rows: &[LossRow]) -> String {
    let mut out = String::from("k,trials,mean_ratio,max_ratio,mean_loss,max_loss,mean_loss_lower_bound,max_stretch,passes\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{},{:.6},{:.9},{}\n",
            r.k, r.trials, r.mean_ratio, r.max_ratio, r.mean_loss, r.max_loss, r.mean_loss_lower_bound, r.max_stretch, r.passes
        ));
    }
    out
}
