//! Immutable undirected weighted graphs, vertex sets and path oracles.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{eq_rel, Scalar};

/// Sorted, deduplicated set of vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet {
    ids: Vec<usize>,
}

impl VertexSet {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        VertexSet { ids }
    }

    pub fn empty() -> Self {
        VertexSet::default()
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        VertexSet {
            ids: mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect(),
        }
    }

    /// Checks that every id is below `n`.
    pub fn within(self, n: usize) -> Result<Self> {
        match self.ids.last() {
            Some(&m) if m >= n => Err(Error::VertexOutOfRange(m, n)),
            _ => Ok(self),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.ids {
            m[v] = true;
        }
        m
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut ids = Vec::with_capacity(self.len() + other.len());
        ids.extend_from_slice(&self.ids);
        ids.extend_from_slice(&other.ids);
        VertexSet::new(ids)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            ids: self.ids.iter().copied().filter(|&v| !other.contains(v)).collect(),
        }
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.ids.iter().all(|&v| other.contains(v))
    }

    pub fn complement_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![true; n];
        for &v in &self.ids {
            m[v] = false;
        }
        m
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

/// Undirected graph on `0..n` stored as sorted adjacency lists (CSR).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<T>,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Builds from an edge multiset: self-loops are dropped, parallel edges
    /// collapse to the first occurrence after sorting.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut list = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange(u.max(v), n));
            }
            if !(w >= T::zero()) {
                return Err(Error::InvalidParameter(format!("edge ({u},{v}) has weight {w}")));
            }
            if u != v {
                list.push((u.min(v) as u32, u.max(v) as u32, w));
            }
        }
        list.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        list.dedup_by(|b, a| a.0 == b.0 && a.1 == b.1);
        Ok(Self::from_sorted_unique(n, &list))
    }

    /// Builds from unweighted pairs, weighting each pair with `weight(u, v)`.
    pub fn from_pairs<F>(n: usize, mut pairs: Vec<(u32, u32)>, weight: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> T,
    {
        for p in pairs.iter_mut() {
            if p.0 as usize >= n || p.1 as usize >= n {
                return Err(Error::VertexOutOfRange(p.0.max(p.1) as usize, n));
            }
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.retain(|p| p.0 != p.1);
        pairs.sort_unstable();
        pairs.dedup();
        let list: Vec<(u32, u32, T)> = pairs
            .into_iter()
            .map(|(u, v)| (u, v, weight(u as usize, v as usize)))
            .collect();
        Ok(Self::from_sorted_unique(n, &list))
    }

    fn from_sorted_unique(n: usize, list: &[(u32, u32, T)]) -> Self {
        let mut deg = vec![0usize; n + 1];
        for &(u, v, _) in list {
            deg[u as usize + 1] += 1;
            deg[v as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let offsets = deg;
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; 2 * list.len()];
        let mut weights = vec![T::zero(); 2 * list.len()];
        // `list` is sorted by (u, v): inserting v into u's row in order, and u
        // into v's row in order of u, keeps every row sorted.
        for &(u, v, w) in list {
            let (u, v) = (u as usize, v as usize);
            targets[fill[v]] = u as u32;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
        for &(u, v, w) in list {
            let (u, v) = (u as usize, v as usize);
            targets[fill[u]] = v as u32;
            weights[fill[u]] = w;
            fill[u] += 1;
        }
        WeightedGraph { n, offsets, targets, weights }
    }

    /// Graph on the integer line: vertex `i` sits at position `i + 1`, weights are gaps.
    pub fn line(n: usize, pairs: Vec<(u32, u32)>) -> Result<Self> {
        Self::from_pairs(n, pairs, |u, v| T::of_usize(u.abs_diff(v)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn neighbor_ids(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.weights[r])
            .map(|(&v, &w)| (v as usize, w))
    }

    /// Neighbors with larger id (edges oriented left to right).
    pub fn forward_neighbors(&self, u: usize) -> &[u32] {
        let row = self.neighbor_ids(u);
        let start = row.partition_point(|&v| (v as usize) <= u);
        &row[start..]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbor_ids(u).binary_search(&(v as u32)).is_ok()
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u).filter(move |&(v, _)| v > u).map(move |(v, w)| (u, v, w))
        })
    }

    /// Induced subgraph on `0..m`.
    pub fn truncate(&self, m: usize) -> Self {
        let list: Vec<(u32, u32, T)> = self
            .edges()
            .filter(|&(_, v, _)| v < m)
            .map(|(u, v, w)| (u as u32, v as u32, w))
            .collect();
        Self::from_sorted_unique(m.min(self.n), &list)
    }

    /// Checks every weight against a metric on the vertices.
    pub fn weights_match<F: Fn(usize, usize) -> T>(&self, dist: F) -> bool {
        self.edges().all(|(u, v, w)| eq_rel(w, dist(u, v)))
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem<T>(T, usize);

impl<T: PartialOrd> Eq for HeapItem<T> {}

impl<T: PartialOrd> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for HeapItem<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

/// Dijkstra from `source` in the subgraph induced by `alive`.
///
/// Dead and unreachable vertices get `+inf`.
pub fn shortest_path_length<T: Scalar>(
    g: &WeightedGraph<T>,
    alive: &[bool],
    source: usize,
) -> Result<Vec<T>> {
    if source >= g.n() {
        return Err(Error::VertexOutOfRange(source, g.n()));
    }
    if !alive[source] {
        return Err(Error::SourceInFailureSet);
    }
    let mut dist = vec![T::infinity(); g.n()];
    let mut heap = BinaryHeap::new();
    dist[source] = T::zero();
    heap.push(HeapItem(T::zero(), source));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for (v, w) in g.neighbors(u) {
            if !alive[v] {
                continue;
            }
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

/// Vertices reachable from `source` by paths monotone in `direction`, avoiding
/// `failed`. On the line these are exactly the 1-paths.
pub fn monotone_reach_1d<T: Scalar>(
    g: &WeightedGraph<T>,
    failed: &VertexSet,
    source: usize,
    direction: Direction,
) -> Result<VertexSet> {
    if source >= g.n() {
        return Err(Error::VertexOutOfRange(source, g.n()));
    }
    if failed.contains(source) {
        return Err(Error::SourceInFailureSet);
    }
    let dead = failed.mask(g.n());
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::from([source]);
    seen[source] = true;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbor_ids(u) {
            let v = v as usize;
            let ok = match direction {
                Direction::Right => v > u,
                Direction::Left => v < u,
            };
            if ok && !dead[v] && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen[source] = false;
    Ok(VertexSet::from_mask(&seen))
}

/// Sizes of connected components of the subgraph induced by `alive`, largest first.
pub fn component_sizes<T: Scalar>(g: &WeightedGraph<T>, alive: &[bool]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for s in 0..g.n() {
        if !alive[s] || comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[s] = id;
        stack.push(s);
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in g.neighbor_ids(u) {
                let v = v as usize;
                if alive[v] && comp[v] == usize::MAX {
                    comp[v] = id;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path3() -> WeightedGraph<f64> {
        WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn floyd(g: &WeightedGraph<f64>, alive: &[bool]) -> Vec<Vec<f64>> {
        let n = g.n();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for u in 0..n {
            if !alive[u] {
                continue;
            }
            d[u][u] = 0.0;
            for (v, w) in g.neighbors(u) {
                if alive[v] {
                    d[u][v] = d[u][v].min(w);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> WeightedGraph<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..m)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0.0..10.0)))
            .collect();
        WeightedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn chain_distances() {
        let g = path3();
        let d = shortest_path_length(&g, &[true; 3], 0).unwrap();
        assert_eq!(d, vec![0.0, 1.0, 2.0]);
        let d = shortest_path_length(&g, &[true, false, true], 0).unwrap();
        assert_eq!(d[2], f64::INFINITY);
        assert!(matches!(
            shortest_path_length(&g, &[false, true, true], 0),
            Err(Error::SourceInFailureSet)
        ));
    }

    #[test]
    fn dijkstra_matches_floyd() {
        for seed in 0..5 {
            let g = random_graph(12, 30, seed);
            let alive: Vec<bool> = (0..12).map(|i| i % 5 != 3 || seed == 0).collect();
            let oracle = floyd(&g, &alive);
            for s in (0..12).filter(|&s| alive[s]) {
                let d = shortest_path_length(&g, &alive, s).unwrap();
                for t in 0..12 {
                    if alive[t] {
                        assert!((d[t] - oracle[s][t]).abs() < 1e-9 || d[t] == oracle[s][t]);
                    }
                }
            }
        }
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0), (2, 2, 0.0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(2, 2));
        assert!(WeightedGraph::from_edges(2, [(0, 2, 1.0f64)]).is_err());
    }

    #[test]
    fn monotone_reach_examples() {
        // positions 1..4 map to ids 0..3
        let g = WeightedGraph::<f64>::line(4, vec![(0, 1), (1, 3)]).unwrap();
        let r = monotone_reach_1d(&g, &VertexSet::empty(), 0, Direction::Right).unwrap();
        assert_eq!(r.ids(), &[1, 3]);
        let r = monotone_reach_1d(&g, &VertexSet::new(vec![1]), 0, Direction::Right).unwrap();
        assert!(r.is_empty());
        let r = monotone_reach_1d(&g, &VertexSet::empty(), 3, Direction::Left).unwrap();
        assert_eq!(r.ids(), &[0, 1]);
    }

    /// Enumerates monotone paths explicitly by DFS over increasing ids.
    fn brute_monotone(g: &WeightedGraph<f64>, dead: &[bool], s: usize) -> Vec<usize> {
        fn go(g: &WeightedGraph<f64>, dead: &[bool], u: usize, out: &mut Vec<bool>) {
            for &v in g.neighbor_ids(u) {
                let v = v as usize;
                if v > u && !dead[v] {
                    out[v] = true;
                    go(g, dead, v, out);
                }
            }
        }
        let mut out = vec![false; g.n()];
        go(g, dead, s, &mut out);
        (0..g.n()).filter(|&v| out[v]).collect()
    }

    #[test]
    fn monotone_reach_matches_path_enumeration_and_exact_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let n = 64;
            let pairs: Vec<(u32, u32)> = (0..90)
                .map(|_| {
                    let u = rng.gen_range(0..n as u32);
                    let v = (u + rng.gen_range(1..6)).min(n as u32 - 1);
                    (u, v)
                })
                .collect();
            let g = WeightedGraph::<f64>::line(n, pairs).unwrap();
            let bad = VertexSet::new((0..6).map(|_| rng.gen_range(0..n)).collect());
            let dead = bad.mask(n);
            for s in (0..n).filter(|&s| !dead[s]) {
                let fast = monotone_reach_1d(&g, &bad, s, Direction::Right).unwrap();
                assert_eq!(fast.ids(), brute_monotone(&g, &dead, s).as_slice(), "trial {trial}");
                // In 1D, reachable by a 1-path <=> shortest distance equals the gap.
                let alive: Vec<bool> = dead.iter().map(|&b| !b).collect();
                let d = shortest_path_length(&g, &alive, s).unwrap();
                for t in s + 1..n {
                    let exact = d[t].is_finite() && (d[t] - (t - s) as f64).abs() < 1e-9;
                    assert_eq!(exact, fast.contains(t));
                }
            }
        }
    }

    #[test]
    fn truncate_keeps_induced_edges() {
        let g = WeightedGraph::<f64>::line(5, vec![(0, 4), (0, 1), (2, 3)]).unwrap();
        let t = g.truncate(3);
        assert_eq!(t.n(), 3);
        assert_eq!(t.edges().collect::<Vec<_>>(), vec![(0, 1, 1.0)]);
    }

    #[test]
    fn components() {
        let g = path3();
        assert_eq!(component_sizes(&g, &[true, false, true]), vec![1, 1]);
        assert_eq!(component_sizes(&g, &[true; 3]), vec![3]);
    }

    proptest::proptest! {
        #[test]
        fn distances_symmetric_and_monotone_under_failures(
            seed in 0u64..1000, k1 in 0usize..4, k2 in 0usize..4
        ) {
            let g = random_graph(10, 25, seed);
            let b1: Vec<bool> = (0..10).map(|i| i >= 10 - k1).collect();
            let b2: Vec<bool> = (0..10).map(|i| i >= 10 - k1 - k2).collect();
            let a1: Vec<bool> = b1.iter().map(|&b| !b).collect();
            let a2: Vec<bool> = b2.iter().map(|&b| !b).collect();
            for s in 0..10 {
                if !a2[s] { continue; }
                let d1 = shortest_path_length(&g, &a1, s).unwrap();
                let d2 = shortest_path_length(&g, &a2, s).unwrap();
                for t in 0..10 {
                    if !a2[t] { continue; }
                    proptest::prop_assert!(d1[t] <= d2[t]);
                    let back = shortest_path_length(&g, &a2, t).unwrap();
                    proptest::prop_assert!((back[s] - d2[t]).abs() < 1e-9 || back[s] == d2[t]);
                }
            }
        }
    }
}
