//! Well-separated pair decomposition over a compressed quadtree.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quadtree::Quadtree;

/// Quadtree nodes `u`, `v` whose cells satisfy
/// `s · max(diam u, diam v) <= dist(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WspdPair {
    pub u: usize,
    pub v: usize,
}

pub fn is_separated(tree: &Quadtree, u: usize, v: usize, s: f64) -> bool {
    s * tree.cell_diameter(u).max(tree.cell_diameter(v)) <= tree.cell_distance(u, v)
}

/// `s`-WSPD by recursive splitting of the node with the larger cell.
pub fn build_wspd(tree: &Quadtree, s: f64) -> Result<Vec<WspdPair>> {
    if !(s > 0.0) {
        return Err(invalid(format!("separation must be positive, got {s}")));
    }
    let mut out = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(v) = stack.pop() {
        let kids = &tree.node(v).children;
        for (i, &a) in kids.iter().enumerate() {
            for &b in &kids[i + 1..] {
                split(tree, a, b, s, &mut out);
            }
        }
        stack.extend(kids.iter().rev());
    }
    Ok(out)
}

fn split(tree: &Quadtree, a: usize, b: usize, s: f64, out: &mut Vec<WspdPair>) {
    let mut work = vec![(a, b)];
    while let Some((a, b)) = work.pop() {
        if is_separated(tree, a, b, s) {
            out.push(WspdPair { u: a, v: b });
            continue;
        }
        let (big, other) = if tree.cell_diameter(a) >= tree.cell_diameter(b) { (a, b) } else { (b, a) };
        let big = if tree.node(big).is_leaf() { other } else { big };
        let other = if big == a { b } else { a };
        for &c in tree.node(big).children.iter().rev() {
            work.push((c, other));
        }
    }
}

/// Number of pairs each point takes part in.
pub fn pair_counts(tree: &Quadtree, pairs: &[WspdPair]) -> Vec<usize> {
    let mut per_node = vec![0usize; tree.len()];
    for p in pairs {
        per_node[p.u] += 1;
        per_node[p.v] += 1;
    }
    // Push node counts down to the leaves; parents precede children.
    let mut acc = vec![0usize; tree.len()];
    for v in 0..tree.len() {
        acc[v] = per_node[v] + tree.node(v).parent.map_or(0, |p| acc[p]);
    }
    let n = tree.node(tree.root()).size();
    (0..n).map(|p| acc[tree.leaf_of(p)]).collect()
}
