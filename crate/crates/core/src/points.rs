//! Point sets in R^d.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite set of distinct points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T> {
    d: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointSet<T> {
    pub fn new(d: usize, points: Vec<Vec<T>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Points("dimension must be positive".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * d);
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::Points(format!("point {i} has {} coordinates, expected {d}", p.len())));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Points(format!("point {i} has a non-finite coordinate")));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(d, coords)
    }

    pub fn from_flat(d: usize, coords: Vec<T>) -> Result<Self> {
        if d == 0 || coords.len() % d != 0 {
            return Err(Error::Points("coordinate count not a multiple of d".into()));
        }
        let ps = PointSet { d, coords };
        if let Some((i, j)) = ps.duplicate_pair() {
            return Err(Error::Points(format!("points {i} and {j} coincide")));
        }
        Ok(ps)
    }

    fn duplicate_pair(&self) -> Option<(usize, usize)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        idx.windows(2).find(|w| self.point(w[0]) == self.point(w[1])).map(|w| (w[0], w[1]))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn dist(&self, i: usize, j: usize) -> T {
        euclid(self.point(i), self.point(j))
    }

    pub fn diameter(&self) -> T {
        let n = self.len();
        let mut best = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// Closest-pair distance; `+inf` for fewer than two points.
    pub fn closest_pair(&self) -> T {
        let n = self.len();
        let mut best = T::infinity();
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(self.dist(i, j));
            }
        }
        best
    }

    /// Diameter over closest-pair distance.
    pub fn spread(&self) -> T {
        if self.len() < 2 {
            return T::one();
        }
        self.diameter() / self.closest_pair()
    }

    /// Affine copy inside `[0.125, 0.875)^d`, uniform scale on all axes.
    pub fn normalized(&self) -> Normalized<T> {
        let d = self.d;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in self.iter() {
            for a in 0..d {
                let x = p[a].as_f64();
                lo[a] = lo[a].min(x);
                hi[a] = hi[a].max(x);
            }
        }
        let extent = (0..d).map(|a| hi[a] - lo[a]).fold(0.0f64, f64::max);
        let extent = if extent > 0.0 { extent } else { 1.0 };
        let scale = 0.75 / extent;
        let top = 0.875f64.next_down();
        let coords = self
            .iter()
            .flat_map(|p| {
                let lo = &lo;
                p.iter().enumerate().map(move |(a, &x)| {
                    T::of((0.125 + (x.as_f64() - lo[a]) * scale).clamp(0.125, top))
                })
            })
            .collect();
        Normalized { points: PointSet { d, coords }, scale, offset: lo }
    }
}

/// Result of [`PointSet::normalized`]; original distance = normalized / `scale`.
#[derive(Debug, Clone)]
pub struct Normalized<T> {
    pub points: PointSet<T>,
    pub scale: f64,
    pub offset: Vec<f64>,
}

pub fn euclid<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_of_unit_grid() {
        let pts: Vec<Vec<f64>> = (0..4).flat_map(|i| (0..4).map(move |j| vec![i as f64, j as f64])).collect();
        let ps = PointSet::new(2, pts).unwrap();
        assert_eq!(ps.closest_pair(), 1.0);
        assert!((ps.diameter() - 18f64.sqrt()).abs() < 1e-12);
        assert!((ps.spread() - 18f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_duplicates_and_ragged() {
        assert!(PointSet::new(2, vec![vec![0.0, 1.0], vec![0.0, 1.0]]).is_err());
        assert!(PointSet::new(2, vec![vec![0.0f64]]).is_err());
    }

    #[test]
    fn normalization_preserves_ratios() {
        let ps = PointSet::new(2, vec![vec![-3.0f64, 10.0], vec![5.0, 10.0], vec![1.0, 12.0]]).unwrap();
        let nz = ps.normalized();
        for p in nz.points.iter() {
            assert!(p.iter().all(|&x| (0.125..0.875).contains(&x)));
        }
        let r = nz.points.dist(0, 2) / nz.points.dist(0, 1);
        assert!((r - ps.dist(0, 2) / ps.dist(0, 1)).abs() < 1e-12);
        assert!((nz.points.dist(0, 1) / nz.scale - 8.0).abs() < 1e-9);
    }
}
