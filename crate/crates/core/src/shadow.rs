//! Shadows of a failure set: on the line, in a quadtree, and for Euclidean
//! balls, plus the cone-marking superset.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::VertexSet;
use crate::points::PointSet;
use crate::quadtree::Quadtree;
use crate::ratio::Threshold;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowSide {
    Left,
    Right,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    /// Inclusive id range on the line.
    Interval { lo: usize, hi: usize },
    /// Quadtree node id.
    Node(usize),
    /// Closed ball radius around the member.
    Radius(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowResult {
    pub threshold: Threshold,
    pub side: ShadowSide,
    pub members: VertexSet,
    /// One witness per member, in member order.
    pub witnesses: Vec<Witness>,
}

impl ShadowResult {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn bad_mask(n: usize, bad: &VertexSet) -> Result<Vec<bool>> {
    if let Some(&v) = bad.ids().last() {
        if v >= n {
            return Err(Error::VertexOutOfRange(v, n));
        }
    }
    Ok(bad.mask(n))
}

/// For each `i`, the end of some interval starting at `i` that reaches the
/// threshold (scanning toward larger ids), if any.
fn one_side(bad: &[bool], alpha: Threshold, forward: bool) -> Vec<Option<usize>> {
    let n = bad.len();
    let mut out = vec![None; n];
    let mut best: i64 = 0;
    let mut end = 0usize;
    let order: Box<dyn Iterator<Item = usize>> = if forward { Box::new((0..n).rev()) } else { Box::new(0..n) };
    let mut first = true;
    for i in order {
        let y = alpha.weight(bad[i]);
        if first || best <= 0 {
            best = y;
            end = i;
        } else {
            best += y;
        }
        first = false;
        if best >= 0 {
            out[i] = Some(end);
        }
    }
    out
}

/// Left and right α-shadow on ids `0..n`. Exact integer arithmetic, linear
/// time per side.
pub fn shadow_1d(n: usize, bad: &VertexSet, alpha: Threshold) -> Result<ShadowResult> {
    shadow_1d_sided(n, bad, alpha, ShadowSide::Both)
}

pub fn shadow_1d_sided(n: usize, bad: &VertexSet, alpha: Threshold, side: ShadowSide) -> Result<ShadowResult> {
    let mask = bad_mask(n, bad)?;
    let left = if side != ShadowSide::Right { one_side(&mask, alpha, true) } else { vec![None; n] };
    let right = if side != ShadowSide::Left { one_side(&mask, alpha, false) } else { vec![None; n] };
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    for i in 0..n {
        let w = match (left[i], right[i]) {
            (Some(hi), _) => Witness::Interval { lo: i, hi },
            (None, Some(lo)) => Witness::Interval { lo, hi: i },
            _ => continue,
        };
        members.push(i);
        witnesses.push(w);
    }
    Ok(ShadowResult { threshold: alpha, side, members: VertexSet::new(members), witnesses })
}

/// Membership mask of the combined 1D shadow, without witnesses.
pub fn shadow_1d_mask(bad: &[bool], alpha: Threshold) -> Vec<bool> {
    let l = one_side(bad, alpha, true);
    let r = one_side(bad, alpha, false);
    l.iter().zip(&r).map(|(a, b)| a.is_some() || b.is_some()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowBounds {
    pub size: usize,
    pub failed: usize,
    /// `2(1 + ⌈1/α⌉)|B|`, valid for every α.
    pub general: BoundCheck,
    /// `|B| / (2α − 1)`, only checked for α in (2/3, 1).
    pub dense: Option<BoundCheck>,
}

impl ShadowBounds {
    pub fn holds(&self) -> bool {
        self.general.holds && self.dense.as_ref().is_none_or(|c| c.holds)
    }
}

pub fn check_shadow_bounds(result: &ShadowResult, bad: &VertexSet, alpha: Threshold) -> ShadowBounds {
    let s = result.len() as u64;
    let b = bad.len() as u64;
    let g = 2 * (1 + alpha.ceil_inverse()) * b;
    let (num, den) = (alpha.num(), alpha.den());
    let dense = (3 * num > 2 * den && num < den).then(|| {
        let slack = 2 * num - den;
        BoundCheck { bound: b as f64 * den as f64 / slack as f64, holds: s as u128 * slack as u128 <= b as u128 * den as u128 }
    });
    ShadowBounds {
        size: s as usize,
        failed: b as usize,
        general: BoundCheck { bound: g as f64, holds: s <= g },
        dense,
    }
}

fn node_marks(tree: &Quadtree, bad: &VertexSet, gamma: Threshold) -> Vec<bool> {
    let m = tree.len();
    let mut cnt = vec![0u64; m];
    for v in (0..m).rev() {
        let node = tree.node(v);
        if node.is_leaf() {
            cnt[v] = bad.contains(tree.points_in(v)[0]) as u64;
        }
        if let Some(p) = node.parent {
            cnt[p] += cnt[v];
        }
    }
    (0..m).map(|v| cnt[v] > 0 && gamma.reached(cnt[v], tree.node(v).size() as u64)).collect()
}

/// Union of `P_v` over quadtree nodes whose failed fraction reaches γ. The
/// witness is the topmost such ancestor.
pub fn shadow_quadtree(tree: &Quadtree, bad: &VertexSet, gamma: Threshold) -> ShadowResult {
    let mut top: Vec<Option<usize>> = vec![None; tree.node(tree.root()).size()];
    for v in maximal_shadow_nodes(tree, bad, gamma) {
        for &p in tree.points_in(v) {
            top[p] = Some(v);
        }
    }
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    for (p, w) in top.iter().enumerate() {
        if let Some(v) = w {
            members.push(p);
            witnesses.push(Witness::Node(*v));
        }
    }
    ShadowResult { threshold: gamma, side: ShadowSide::Both, members: VertexSet::new(members), witnesses }
}

/// Shadowed nodes with no shadowed ancestor.
pub fn maximal_shadow_nodes(tree: &Quadtree, bad: &VertexSet, gamma: Threshold) -> Vec<usize> {
    let marks = node_marks(tree, bad, gamma);
    let mut covered = vec![false; tree.len()];
    let mut out = Vec::new();
    // Pre-order ids: parents precede children.
    for v in 0..tree.len() {
        let up = tree.node(v).parent.is_some_and(|p| covered[p]);
        covered[v] = up || marks[v];
        if marks[v] && !up {
            out.push(v);
        }
    }
    out
}

/// Exact ball shadow: `p` is a member when some closed ball around it has
/// failed fraction at least α. Only radii equal to a distance from `p`
/// matter.
pub fn shadow_balls_oracle<T: Scalar>(points: &PointSet<T>, bad: &VertexSet, alpha: Threshold) -> Result<ShadowResult> {
    let n = points.len();
    let mask = bad_mask(n, bad)?;
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    let mut order: Vec<(T, usize)> = Vec::with_capacity(n);
    for p in 0..n {
        order.clear();
        order.extend((0..n).map(|q| (points.dist(p, q), q)));
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let (mut total, mut hits) = (0u64, 0u64);
        let mut k = 0;
        while k < n {
            let r = order[k].0;
            while k < n && order[k].0 == r {
                total += 1;
                hits += mask[order[k].1] as u64;
                k += 1;
            }
            if hits > 0 && alpha.reached(hits, total) {
                members.push(p);
                witnesses.push(Witness::Radius(r.as_f64()));
                break;
            }
        }
    }
    Ok(ShadowResult { threshold: alpha, side: ShadowSide::Both, members: VertexSet::new(members), witnesses })
}

/// Number of cones used by [`cone_mark_unsafe`] in dimension `d`.
pub fn cone_count(d: usize) -> Result<usize> {
    match d {
        2 => Ok(6),
        3 => Ok(54),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Cone containing direction `v`. In the plane: six half-open 60° sectors.
/// In space: each cube face split into a 3×3 grid (angular diameter about
/// 50.5°).
pub fn cone_of(v: &[f64]) -> usize {
    match v.len() {
        2 => {
            let mut a = v[1].atan2(v[0]);
            if a < 0.0 {
                a += std::f64::consts::TAU;
            }
            ((a / std::f64::consts::FRAC_PI_3) as usize).min(5)
        }
        3 => {
            let mut axis = 0;
            for a in 1..3 {
                if v[a].abs() > v[axis].abs() {
                    axis = a;
                }
            }
            let face = 2 * axis + (v[axis] < 0.0) as usize;
            let top = v[axis].abs();
            let cell = |x: f64| (((x / top + 1.0) * 1.5) as usize).min(2);
            let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
            face * 9 + cell(v[b]) * 3 + cell(v[c])
        }
        _ => unreachable!("cone_of called with unsupported dimension"),
    }
}

/// Marks a superset `F` of the α ball shadow: every failed point together
/// with, per failed point and cone, the `⌈1/α⌉` closest unmarked good points
/// in that cone. Ties go to the lower id.
pub fn cone_mark_unsafe<T: Scalar>(points: &PointSet<T>, bad: &VertexSet, alpha: Threshold) -> Result<VertexSet> {
    let d = points.dim();
    let cones = cone_count(d)?;
    let n = points.len();
    let mask = bad_mask(n, bad)?;
    let take = alpha.ceil_inverse() as usize;
    let mut working = vec![true; n];
    let mut marked = mask.clone();
    let mut buckets: Vec<Vec<(f64, usize)>> = vec![Vec::new(); cones];
    let mut dir = vec![0.0; d];
    for q in bad.iter() {
        working[q] = false;
        buckets.iter_mut().for_each(Vec::clear);
        let pq = points.point(q);
        for w in 0..n {
            if !working[w] || mask[w] {
                continue;
            }
            let pw = points.point(w);
            for a in 0..d {
                dir[a] = pw[a].as_f64() - pq[a].as_f64();
            }
            buckets[cone_of(&dir)].push((points.dist(q, w).as_f64(), w));
        }
        for bucket in &mut buckets {
            bucket.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, w) in bucket.iter().take(take) {
                working[w] = false;
                marked[w] = true;
            }
        }
    }
    Ok(VertexSet::from_mask(&marked))
}
