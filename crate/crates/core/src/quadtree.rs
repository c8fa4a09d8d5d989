//! Compressed quadtree over a normalized point set.
//!
//! Coordinates are normalized into `[0.125, 0.875)^d` and quantized to 62-bit
//! fixed point (exact for `f64`). Every internal node is the smallest
//! quadtree cell containing its points and has at least two non-empty
//! children; chains of single-child cells are collapsed. Leaves hold exactly
//! one point and their cell is that point.

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::scalar::Scalar;

const BITS: u32 = 62;

#[derive(Debug, Clone)]
pub struct Node {
    /// `log2` of the cell side in fixed-point units; 0 for leaves.
    pub side_exp: u32,
    /// Lower corner of the cell (fixed point).
    pub corner: Vec<u64>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Range into [`Quadtree::points_in`] order.
    pub start: usize,
    pub end: usize,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn size(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Debug, Clone)]
pub struct Quadtree {
    d: usize,
    nodes: Vec<Node>,
    order: Vec<usize>,
    leaf_of: Vec<usize>,
    /// Normalized distance = original distance * scale.
    scale: f64,
}

fn quantize(x: f64) -> u64 {
    (x * (1u64 << BITS) as f64) as u64
}

impl Quadtree {
    pub fn build<T: Scalar>(points: &PointSet<T>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Points("empty point set".into()));
        }
        if n >= 2 {
            let lg = points.spread().as_f64().log2();
            if lg > 60.0 {
                return Err(Error::SpreadOverflow(lg));
            }
        }
        let d = points.dim();
        // Normalize in f64 regardless of the scalar type.
        let as64 = PointSet::<f64>::from_flat(d, points.iter().flatten().map(|x| x.as_f64()).collect())?;
        let nz = as64.normalized();
        let q: Vec<Vec<u64>> = nz.points.iter().map(|p| p.iter().map(|&x| quantize(x)).collect()).collect();
        let mut tree = Quadtree { d, nodes: Vec::new(), order: Vec::with_capacity(n), leaf_of: vec![0; n], scale: nz.scale };
        tree.grow(&q, (0..n).collect(), None)?;
        Ok(tree)
    }

    fn grow(&mut self, q: &[Vec<u64>], idx: Vec<usize>, parent: Option<usize>) -> Result<usize> {
        let id = self.nodes.len();
        let start = self.order.len();
        if idx.len() == 1 {
            let p = idx[0];
            self.order.push(p);
            self.leaf_of[p] = id;
            self.nodes.push(Node { side_exp: 0, corner: q[p].clone(), children: vec![], parent, start, end: start + 1 });
            return Ok(id);
        }
        let first = &q[idx[0]];
        let mut diff = 0u64;
        for &i in &idx[1..] {
            for a in 0..self.d {
                diff |= q[i][a] ^ first[a];
            }
        }
        if diff == 0 {
            return Err(Error::Points("points coincide after quantization".into()));
        }
        let h = 63 - diff.leading_zeros();
        let mask = !((1u64 << (h + 1)) - 1);
        let corner = first.iter().map(|&x| x & mask).collect();
        self.nodes.push(Node { side_exp: h + 1, corner, children: vec![], parent, start, end: start });
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 1 << self.d];
        for &i in &idx {
            let c = (0..self.d).fold(0usize, |c, a| c | (((q[i][a] >> h) & 1) as usize) << a);
            groups[c].push(i);
        }
        let mut children = Vec::new();
        for g in groups.into_iter().filter(|g| !g.is_empty()) {
            children.push(self.grow(q, g, Some(id))?);
        }
        let end = self.order.len();
        let node = &mut self.nodes[id];
        node.children = children;
        node.end = end;
        Ok(id)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.nodes[v]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Point indices stored below `v`.
    pub fn points_in(&self, v: usize) -> &[usize] {
        let n = &self.nodes[v];
        &self.order[n.start..n.end]
    }

    pub fn leaf_of(&self, p: usize) -> usize {
        self.leaf_of[p]
    }

    /// Nodes from the leaf of `p` up to the root.
    pub fn ancestors(&self, p: usize) -> Vec<usize> {
        let mut out = vec![self.leaf_of[p]];
        while let Some(up) = self.nodes[*out.last().unwrap()].parent {
            out.push(up);
        }
        out
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn side(&self, v: usize) -> f64 {
        let e = self.nodes[v].side_exp;
        if e == 0 {
            0.0
        } else {
            (2.0f64).powi(e as i32 - BITS as i32)
        }
    }

    fn bounds(&self, v: usize, a: usize) -> (f64, f64) {
        let lo = self.nodes[v].corner[a] as f64 / (1u64 << BITS) as f64;
        (lo, lo + self.side(v))
    }

    /// Cell diameter in normalized units.
    pub fn cell_diameter(&self, v: usize) -> f64 {
        self.side(v) * (self.d as f64).sqrt()
    }

    /// Distance between two cells in normalized units.
    pub fn cell_distance(&self, u: usize, v: usize) -> f64 {
        (0..self.d)
            .map(|a| {
                let (ul, uh) = self.bounds(u, a);
                let (vl, vh) = self.bounds(v, a);
                let gap = (vl - uh).max(ul - vh).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Cell diameter in the units of the input point set.
    pub fn cell_diameter_original(&self, v: usize) -> f64 {
        self.cell_diameter(v) / self.scale
    }
}
