//! Reliable `(1+ε)`-spanners in `ℝ^d`: the ordering-based construction and
//! the quadtree construction for bounded spread.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::expander::{bipartite_constant, sample_bipartite};
use crate::graph::{shortest_path_length, VertexSet, WeightedGraph};
use crate::lso::{build_ordering_family_with, OrderingFamily, DEFAULT_EXTRA_BITS};
use crate::points::PointSet;
use crate::quadtree::Quadtree;
use crate::ratio::Threshold;
use crate::rng::{tags, StreamKey};
use crate::scalar::Scalar;
use crate::shadow::{shadow_1d_mask, shadow_quadtree};
use crate::spanner1d::{build_g_theta, GThetaParams, Mode, FAITHFUL_C};
use crate::wspd::{build_wspd, WspdPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Simple,
    Improved,
}

/// Smallest `c₂` the size analysis admits.
pub const DEFAULT_C2: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HdConfig {
    pub epsilon: f64,
    pub theta: f64,
    pub variant: Variant,
    pub c2: f64,
    pub extra_bits: u32,
    /// Constant `c` of the 1D sub-builder.
    pub c: f64,
    pub mode: Mode,
    pub expander_constant: Option<u64>,
    /// Replaces the derived θ' (experiments only).
    pub theta_prime: Option<f64>,
}

impl HdConfig {
    pub fn new(epsilon: f64, theta: f64, variant: Variant) -> Self {
        HdConfig {
            epsilon,
            theta,
            variant,
            c2: DEFAULT_C2,
            extra_bits: DEFAULT_EXTRA_BITS,
            c: FAITHFUL_C,
            mode: Mode::Faithful,
            expander_constant: None,
            theta_prime: None,
        }
    }

    pub fn experimental(self, c: f64) -> Self {
        HdConfig { c, mode: Mode::Experimental, ..self }
    }

    pub fn is_experimental(&self) -> bool {
        self.mode == Mode::Experimental || self.c2 < DEFAULT_C2 || self.theta_prime.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HdParameters {
    pub sigma: f64,
    /// Number of orderings.
    pub m: usize,
    /// Shadow iterations of the harmed set (1 for the simple variant).
    pub iterations: u32,
    pub theta_prime: f64,
}

fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// `ς`, `M`, the iteration count `⌈log log n⌉ + 1` and `θ'` for `n` points.
pub fn hd_parameters(n: usize, cfg: &HdConfig, d: usize) -> Result<(HdParameters, OrderingFamily)> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) || !(cfg.theta > 0.0 && cfg.theta < 1.0) || !(cfg.c2 > 0.0) {
        return Err(invalid("need epsilon, theta in (0,1) and c2 > 0"));
    }
    let sigma = match cfg.variant {
        Variant::Simple => cfg.epsilon / (cfg.c2 * log2n(n)),
        Variant::Improved => cfg.epsilon / cfg.c2,
    };
    let family = build_ordering_family_with(d, sigma, cfg.extra_bits)?;
    let m = family.len();
    let iterations = match cfg.variant {
        Variant::Simple => 1,
        Variant::Improved => log2n(n).log2().ceil().max(0.0) as u32 + 1,
    };
    let derived = match cfg.variant {
        Variant::Simple => cfg.theta / m as f64,
        Variant::Improved => cfg.theta / (3.0 * iterations as f64 * m as f64),
    };
    let theta_prime = cfg.theta_prime.unwrap_or(derived);
    Ok((HdParameters { sigma, m, iterations, theta_prime }, family))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// The 1D sub-spanner is already complete, so is the union.
    Complete,
    General,
}

#[derive(Debug, Clone)]
pub struct HdSpanner<T> {
    pub graph: WeightedGraph<T>,
    pub config: HdConfig,
    pub params: HdParameters,
    pub family: OrderingFamily,
    pub regime: Regime,
    /// Shift count `N` of the 1D sub-builder.
    pub sub_big_n: u64,
}

fn normalized_f64<T: Scalar>(points: &PointSet<T>) -> Result<PointSet<f64>> {
    let flat = points.iter().flatten().map(|x| x.as_f64()).collect();
    Ok(PointSet::from_flat(points.dim(), flat)?.normalized().points)
}

fn complete<T: Scalar>(points: &PointSet<T>) -> Result<WeightedGraph<T>> {
    let n = points.len() as u32;
    let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    WeightedGraph::from_pairs(n as usize, pairs, |u, v| points.dist(u, v))
}

/// Union over the ordering family of one `θ'`-reliable 1D spanner laid on
/// each ordering's ranks. A single 1D template is drawn and rank-mapped.
pub fn build_hd_spanner<T: Scalar>(points: &PointSet<T>, cfg: HdConfig, seed: u64) -> Result<HdSpanner<T>> {
    let n = points.len();
    if n < 2 {
        return Err(invalid("need at least two points"));
    }
    let (params, family) = hd_parameters(n, &cfg, points.dim())?;
    let sub = GThetaParams {
        theta: params.theta_prime,
        c: cfg.c,
        mode: cfg.mode,
        expander_constant: cfg.expander_constant,
    };
    let template = build_g_theta::<f64>(n, sub, StreamKey::root(seed).child(tags::HD).value())?;
    let sub_big_n = template.layout.big_n;
    log::info!("hd spanner: sigma={} M={} theta'={:e} N={}", params.sigma, params.m, params.theta_prime, sub_big_n);
    if template.graph.edge_count() == n * (n - 1) / 2 {
        return Ok(HdSpanner { graph: complete(points)?, config: cfg, params, family, regime: Regime::Complete, sub_big_n });
    }
    let norm = normalized_f64(points)?;
    let rank_edges: Vec<(usize, usize)> = template.graph.edges().map(|(u, v, _)| (u, v)).collect();
    let mut pairs = Vec::new();
    for ord in family.iter() {
        let ids = ord.sort(&norm);
        pairs.extend(rank_edges.iter().map(|&(a, b)| (ids[a] as u32, ids[b] as u32)));
        if pairs.len() > 1 << 26 {
            let g = WeightedGraph::<T>::from_pairs(n, std::mem::take(&mut pairs), |_, _| T::zero())?;
            pairs = g.edges().map(|(u, v, _)| (u as u32, v as u32)).collect();
        }
    }
    let graph = WeightedGraph::from_pairs(n, pairs, |u, v| points.dist(u, v))?;
    Ok(HdSpanner { graph, config: cfg, params, family, regime: Regime::General, sub_big_n })
}

/// Harmed set of an ordering-based spanner: `B` grown by the union over all
/// orderings of the 1D `(1−θ'/4)`-shadows, repeated `iterations` times.
pub fn hd_harmed_set<T: Scalar>(
    points: &PointSet<T>,
    family: &OrderingFamily,
    bad: &VertexSet,
    theta_prime: f64,
    iterations: u32,
) -> Result<VertexSet> {
    let n = points.len();
    // Below 1/n every qualifying interval is entirely failed.
    if theta_prime / 4.0 < 1.0 / n as f64 {
        return Ok(bad.clone());
    }
    let alpha = Threshold::from_f64(1.0 - theta_prime / 4.0)?;
    let norm = normalized_f64(points)?;
    let orders: Vec<Vec<usize>> = family.iter().map(|o| o.sort(&norm)).collect();
    let mut current = bad.mask(n);
    for _ in 0..iterations {
        let mut next = current.clone();
        for ids in &orders {
            let ranked: Vec<bool> = ids.iter().map(|&v| current[v]).collect();
            for (r, hit) in shadow_1d_mask(&ranked, alpha).into_iter().enumerate() {
                next[ids[r]] |= hit;
            }
        }
        if next == current {
            break;
        }
        current = next;
    }
    Ok(VertexSet::from_mask(&current))
}

#[derive(Debug, Clone)]
pub struct BoundedSpreadSpanner<T> {
    pub graph: WeightedGraph<T>,
    pub tree: Quadtree,
    pub pairs: Vec<WspdPair>,
    pub separation: f64,
    pub xi: f64,
    pub constant: u64,
    pub sibling_expanders: usize,
    pub experimental: bool,
}

/// Quadtree spanner: an expander with `ξ = θ/8` between the point sets of
/// every `(6/ε)`-WSPD pair and of every two siblings.
pub fn build_bounded_spread_spanner<T: Scalar>(
    points: &PointSet<T>,
    epsilon: f64,
    theta: f64,
    seed: u64,
    constant_override: Option<u64>,
) -> Result<BoundedSpreadSpanner<T>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    if !(theta > 0.0 && theta < 0.5) {
        return Err(invalid(format!("theta must lie in (0,1/2), got {theta}")));
    }
    if constant_override == Some(0) {
        return Err(invalid("degree constant override must be >= 1"));
    }
    let tree = Quadtree::build(points)?;
    let separation = 6.0 / epsilon;
    let wspd = build_wspd(&tree, separation)?;
    let xi = theta / 8.0;
    let constant = constant_override.unwrap_or_else(|| bipartite_constant(xi));
    let key = StreamKey::root(seed).child(tags::BOUNDED_SPREAD);
    let ids = |v: usize| tree.points_in(v).iter().map(|&p| p as u32).collect::<Vec<_>>();
    let mut pairs = Vec::new();
    for (i, pr) in wspd.iter().enumerate() {
        sample_bipartite(&ids(pr.u), &ids(pr.v), constant, key.path(&[0, i as u64]), &mut pairs);
    }
    let mut sibling_expanders = 0;
    for v in 0..tree.len() {
        let kids = &tree.node(v).children;
        for (a, &x) in kids.iter().enumerate() {
            for (b, &y) in kids.iter().enumerate().skip(a + 1) {
                sample_bipartite(&ids(x), &ids(y), constant, key.path(&[1, v as u64, a as u64, b as u64]), &mut pairs);
                sibling_expanders += 1;
            }
        }
    }
    let graph = WeightedGraph::from_pairs(points.len(), pairs, |u, v| points.dist(u, v))?;
    Ok(BoundedSpreadSpanner {
        graph,
        tree,
        pairs: wspd,
        separation,
        xi,
        constant,
        sibling_expanders,
        experimental: constant_override.is_some(),
    })
}

/// `γ = 1 − θ/2`.
pub fn quadtree_gamma(theta: f64) -> Result<Threshold> {
    Threshold::from_f64(1.0 - theta / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClimbUpViolation {
    pub point: usize,
    pub node: usize,
    pub reached: usize,
    pub needed: f64,
}

/// For every survivor `p` outside the γ-shadow and every node `u` above it,
/// checks that at least `3ξ|P_u|` points of `P_u` are within
/// `2·diam(cell u)` of `p` in `G \ B`.
pub fn climb_up_violations<T: Scalar>(
    g: &WeightedGraph<T>,
    tree: &Quadtree,
    bad: &VertexSet,
    theta: f64,
    xi: f64,
) -> Result<Vec<ClimbUpViolation>> {
    let n = g.n();
    let shadow = shadow_quadtree(tree, bad, quadtree_gamma(theta)?);
    let alive = bad.complement_mask(n);
    let mut out = Vec::new();
    for p in (0..n).filter(|&p| alive[p] && !shadow.members.contains(p)) {
        let dist = shortest_path_length(g, &alive, p)?;
        for u in tree.ancestors(p) {
            let limit = 2.0 * tree.cell_diameter_original(u) * (1.0 + 1e-9);
            let reached = tree.points_in(u).iter().filter(|&&q| alive[q] && dist[q].as_f64() <= limit).count();
            let needed = 3.0 * xi * tree.node(u).size() as f64;
            if (reached as f64) < needed {
                out.push(ClimbUpViolation { point: p, node: u, reached, needed });
            }
        }
    }
    Ok(out)
}
