//! Locality-sensitive orderings of `[0,1)^d`.
//!
//! An ordering shifts a point by a diagonal vector, quantizes each axis to
//! 32 bits (the shifted cube is `[0,2)^d`) and cuts the bit levels into
//! chunks of `w` bits, the first chunk holding `offset` bits. Two points
//! are compared in the first chunk where they differ: the `d·w`-bit
//! interleaved subcell digits are ranked along one of the Hamiltonian paths
//! of a Walecki decomposition of the complete graph on the subcells. Every
//! pair of subcells is adjacent on some path, so for every pair of points
//! some member of the family has nothing between them except points of the
//! two subcells that contain them.

use std::cmp::Ordering as Cmp;

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::points::{euclid, PointSet};
use crate::rng::{tags, StreamKey};
use crate::scalar::Scalar;

const FRAC_BITS: u32 = 31;
const KEY_BITS: u32 = 32;

/// Bits added to `⌈log2(1/ς)⌉` per chunk.
pub const DEFAULT_EXTRA_BITS: u32 = 3;

/// Position of subcell `x` on Walecki path `k` of `m` vertices.
pub fn walecki_position(x: u64, k: u64, m: u64) -> u64 {
    let delta = (x + m - k % m) % m;
    if delta == 0 {
        0
    } else if delta <= m / 2 {
        2 * delta - 1
    } else {
        2 * (m - delta)
    }
}

/// Subcell at position `pos` of Walecki path `k`.
pub fn walecki_vertex(pos: u64, k: u64, m: u64) -> u64 {
    let j = pos.div_ceil(2);
    if pos % 2 == 1 {
        (k + j) % m
    } else {
        (k + m - j % m) % m
    }
}

/// The path on which subcells `a != b` are consecutive.
pub fn walecki_path_for(a: u64, b: u64, m: u64) -> u64 {
    ((a + b) % m / 2) % (m / 2).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ordering {
    pub id: usize,
    pub d: usize,
    /// Fixed-point shift per axis (units of `2^-31`).
    pub shift: Vec<u32>,
    pub chunk: u32,
    pub offset: u32,
    pub path: u64,
    /// Plain interleaved order with no shift and no path permutation.
    pub natural: bool,
}

fn quantize(x: f64) -> u32 {
    (x.clamp(0.0, 1.0) * (1u64 << FRAC_BITS) as f64).min(((1u64 << FRAC_BITS) - 1) as f64) as u32
}

/// `(start, length)` of the chunk holding top-bit index `t`.
fn chunk_at(t: u32, w: u32, r: u32) -> (u32, u32) {
    if t < r {
        (0, r)
    } else {
        let start = r + (t - r) / w * w;
        (start, w.min(KEY_BITS - start))
    }
}

fn digit(key: &[u32], start: u32, len: u32) -> u64 {
    let low = KEY_BITS - start - len;
    let mut out = 0u64;
    for b in (0..len).rev() {
        for &x in key {
            out = (out << 1) | ((x >> (low + b)) & 1) as u64;
        }
    }
    out
}

impl Ordering {
    /// Shifted fixed-point key of a point of `[0,1)^d`.
    pub fn key(&self, x: &[f64]) -> Vec<u32> {
        x.iter().zip(&self.shift).map(|(&c, &s)| quantize(c) + s).collect()
    }

    fn top_difference(a: &[u32], b: &[u32]) -> Option<u32> {
        let diff = a.iter().zip(b).fold(0u32, |m, (x, y)| m | (x ^ y));
        (diff != 0).then(|| diff.leading_zeros())
    }

    /// Compares two keys. `Equal` only for identical keys.
    pub fn compare_keys(&self, a: &[u32], b: &[u32]) -> Cmp {
        let Some(t) = Self::top_difference(a, b) else {
            return Cmp::Equal;
        };
        if self.natural {
            let bit = KEY_BITS - 1 - t;
            let axis = (0..self.d).find(|&i| (a[i] ^ b[i]) >> bit & 1 == 1).unwrap();
            return (a[axis] >> bit & 1).cmp(&(b[axis] >> bit & 1));
        }
        let (start, len) = chunk_at(t, self.chunk, self.offset);
        let m = 1u64 << (self.d as u32 * len);
        let k = self.path % (m / 2).max(1);
        walecki_position(digit(a, start, len), k, m).cmp(&walecki_position(digit(b, start, len), k, m))
    }

    pub fn compare(&self, a: &[f64], b: &[f64]) -> Cmp {
        self.compare_keys(&self.key(a), &self.key(b))
    }

    /// Point ids sorted by this ordering; equal keys fall back to the id.
    pub fn sort<T: Scalar>(&self, points: &PointSet<T>) -> Vec<usize> {
        let keys: Vec<Vec<u32>> =
            points.iter().map(|p| self.key(&p.iter().map(|x| x.as_f64()).collect::<Vec<_>>())).collect();
        let mut ids: Vec<usize> = (0..points.len()).collect();
        ids.sort_by(|&i, &j| self.compare_keys(&keys[i], &keys[j]).then(i.cmp(&j)));
        ids
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingFamily {
    pub d: usize,
    pub sigma: f64,
    /// Bits per chunk.
    pub chunk: u32,
    pub extra_bits: u32,
    /// Diagonal shifts `j/(d+1) · (1,…,1)` in fixed point.
    pub shifts: Vec<u32>,
    /// Family size.
    pub m: usize,
}

pub fn build_ordering_family(d: usize, sigma: f64) -> Result<OrderingFamily> {
    build_ordering_family_with(d, sigma, DEFAULT_EXTRA_BITS)
}

pub fn build_ordering_family_with(d: usize, sigma: f64, extra_bits: u32) -> Result<OrderingFamily> {
    if !(1..=8).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(invalid(format!("sigma must lie in (0,1), got {sigma}")));
    }
    let chunk = crate::expander::ceil_tol((1.0 / sigma).log2()) as u32 + extra_bits;
    if chunk as usize * d > 62 || chunk > KEY_BITS {
        return Err(invalid(format!("chunk of {chunk} bits in dimension {d} is too wide")));
    }
    let shifts = (0..=d as u64).map(|j| ((j << FRAC_BITS) / (d as u64 + 1)) as u32).collect::<Vec<_>>();
    let paths = 1usize << (d as u32 * chunk - 1);
    let m = shifts.len() * chunk as usize * paths + 1;
    Ok(OrderingFamily { d, sigma, chunk, extra_bits, shifts, m })
}

impl OrderingFamily {
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn paths(&self) -> usize {
        1usize << (self.d as u32 * self.chunk - 1)
    }

    /// Member `id`; the last member is the natural order.
    pub fn get(&self, id: usize) -> Ordering {
        assert!(id < self.m, "ordering {id} out of range");
        if id + 1 == self.m {
            return Ordering { id, d: self.d, shift: vec![0; self.d], chunk: self.chunk, offset: 0, path: 0, natural: true };
        }
        let paths = self.paths();
        let path = (id % paths) as u64;
        let rest = id / paths;
        let offset = (rest % self.chunk as usize) as u32;
        let s = self.shifts[rest / self.chunk as usize];
        Ordering { id, d: self.d, shift: vec![s; self.d], chunk: self.chunk, offset, path, natural: false }
    }

    fn id_of(&self, shift: usize, offset: u32, path: u64) -> usize {
        (shift * self.chunk as usize + offset as usize) * self.paths() + path as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = Ordering> + '_ {
        (0..self.m).map(|i| self.get(i))
    }

    /// For every shift and chunk offset, the member on which the subcells
    /// of `p` and `q` are consecutive.
    pub fn candidates(&self, p: &[f64], q: &[f64]) -> Vec<Ordering> {
        let mut out = Vec::new();
        for (si, &s) in self.shifts.iter().enumerate() {
            for offset in 0..self.chunk {
                let probe = Ordering { id: 0, d: self.d, shift: vec![s; self.d], chunk: self.chunk, offset, path: 0, natural: false };
                let (kp, kq) = (probe.key(p), probe.key(q));
                let Some(t) = Ordering::top_difference(&kp, &kq) else { continue };
                let (start, len) = chunk_at(t, self.chunk, offset);
                let m = 1u64 << (self.d as u32 * len);
                let path = walecki_path_for(digit(&kp, start, len), digit(&kq, start, len), m);
                out.push(self.get(self.id_of(si, offset, path)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LsoWitness {
    pub ordering: usize,
    /// In-between points examined for the witness.
    pub checked: usize,
}

/// Draws up to `sample_count` points strictly between `p` and `q` in `ord`
/// (all of them lie in the chunk cell where `p` and `q` split).
fn sample_between(ord: &Ordering, p: &[u32], q: &[u32], sample_count: usize, key: StreamKey) -> Vec<Vec<f64>> {
    let t = Ordering::top_difference(p, q).expect("distinct keys");
    let (start, len) = chunk_at(t, ord.chunk, ord.offset);
    let m = 1u64 << (ord.d as u32 * len);
    let k = ord.path % (m / 2).max(1);
    let (pa, pb) = (walecki_position(digit(p, start, len), k, m), walecki_position(digit(q, start, len), k, m));
    let (lo, hi) = (pa.min(pb), pa.max(pb));
    let low = KEY_BITS - start - len;
    let scale = (1u64 << FRAC_BITS) as f64;
    let mut rng = key.rng();
    let mut out = Vec::new();
    let mut x = vec![0.0; ord.d];
    for _ in 0..sample_count * 50 {
        if out.len() == sample_count {
            break;
        }
        let cell = walecki_vertex(rng.gen_range(lo..=hi), k, m);
        let mut ok = true;
        for a in 0..ord.d {
            let mut coord = 0u64;
            for b in 0..len {
                let bit_index = b as usize * ord.d + (ord.d - 1 - a);
                coord |= ((cell >> bit_index) & 1) << b;
            }
            let prefix = (p[a] as u64 >> (low + len)) << (low + len);
            let base = prefix | (coord << low);
            let fixed = base as f64 + rng.gen::<f64>() * (1u64 << low) as f64;
            x[a] = (fixed - ord.shift[a] as f64) / scale;
            ok &= (0.0..1.0).contains(&x[a]);
        }
        if !ok {
            continue;
        }
        let kx = ord.key(&x);
        if ord.compare_keys(p, &kx) == Cmp::Less && ord.compare_keys(&kx, q) == Cmp::Less {
            out.push(x.clone());
        }
    }
    out
}

/// Everything in `between` (sorted by the ordering) splits at a pivot into a
/// prefix inside `ball(p, ς·ℓ)` and a suffix inside `ball(q, ς·ℓ)`.
fn splits(between: &[Vec<f64>], p: &[f64], q: &[f64], radius: f64) -> bool {
    let in_p = |x: &Vec<f64>| euclid(x.as_slice(), p) <= radius;
    let in_q = |x: &Vec<f64>| euclid(x.as_slice(), q) <= radius;
    let first_not_p = between.iter().position(|x| !in_p(x)).unwrap_or(between.len());
    between[first_not_p..].iter().all(in_q)
}

/// Searches the family for an ordering in which every sampled point strictly
/// between `p` and `q` lies in the two `ς·‖p−q‖` balls, consistently with a
/// pivot. `dataset` points between `p` and `q` are checked as well.
pub fn check_lso_property(
    family: &OrderingFamily,
    p: &[f64],
    q: &[f64],
    sample_count: usize,
    dataset: Option<&PointSet<f64>>,
    seed: u64,
) -> Option<LsoWitness> {
    let radius = family.sigma * euclid(p, q);
    if radius == 0.0 {
        return None;
    }
    let key = StreamKey::root(seed).child(tags::LSO_CHECK);
    for ord in family.candidates(p, q) {
        let (mut kp, mut kq) = (ord.key(p), ord.key(q));
        let (mut a, mut b) = (p, q);
        match ord.compare_keys(&kp, &kq) {
            Cmp::Equal => continue,
            Cmp::Greater => {
                std::mem::swap(&mut kp, &mut kq);
                std::mem::swap(&mut a, &mut b);
            }
            Cmp::Less => {}
        }
        let mut between = sample_between(&ord, &kp, &kq, sample_count, key.child(ord.id as u64));
        if let Some(ps) = dataset {
            for x in ps.iter() {
                let kx = ord.key(x);
                if ord.compare_keys(&kp, &kx) == Cmp::Less && ord.compare_keys(&kx, &kq) == Cmp::Less {
                    between.push(x.to_vec());
                }
            }
        }
        let checked = between.len();
        let keys: Vec<Vec<u32>> = between.iter().map(|x| ord.key(x)).collect();
        let mut idx: Vec<usize> = (0..between.len()).collect();
        idx.sort_by(|&i, &j| ord.compare_keys(&keys[i], &keys[j]));
        let sorted: Vec<Vec<f64>> = idx.into_iter().map(|i| between[i].clone()).collect();
        if splits(&sorted, a, b, radius) {
            return Some(LsoWitness { ordering: ord.id, checked });
        }
    }
    None
}
