//! Points, flattened point sets, and a bucket index for box queries.
//!
//! Everything operates on the closed unit cube. Point sets are stored as a
//! flat coordinate buffer to keep sample logs and grids cache-friendly; the
//! [`BucketIndex`] partitions the cube into a uniform bucket lattice so that
//! "all points within `h` in sup norm" queries touch only nearby buckets
//! instead of the whole set.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

/// An owned point.
pub type Point = Vec<f64>;

/// Sup-norm distance between two points of equal dimension.
pub fn linf_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let diff = (x - y).abs();
        if diff > d {
            d = diff;
        }
    }
    d
}

/// Euclidean distance between two points of equal dimension.
pub fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        s += diff * diff;
    }
    s.sqrt()
}

/// Is `x` inside the closed unit cube?
pub fn in_unit_cube(x: &[f64]) -> bool {
    x.iter().all(|&c| (0.0..=1.0).contains(&c))
}

/// A set of points of fixed dimension, stored flat.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        PointSet { dim, coords: Vec::new() }
    }

    pub fn with_capacity(dim: usize, points: usize) -> Self {
        PointSet { dim, coords: Vec::with_capacity(dim * points) }
    }

    /// Wrap an existing flat buffer; `coords.len()` must divide into `dim`-chunks.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0);
        PointSet { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.coords.extend_from_slice(x);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// The subset at `indices`, as a new set (used to materialize active sets).
    pub fn subset(&self, indices: &[u32]) -> PointSet {
        let mut out = PointSet::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.push(self.get(i as usize));
        }
        out
    }
}

/// Uniform bucket lattice over `[0, 1]^d` for sup-norm box queries.
///
/// Resolution is chosen so buckets hold a handful of points each; queries
/// clamp to the lattice, so points exactly on the upper boundary are safe.
#[derive(Clone, Debug)]
pub struct BucketIndex {
    dim: usize,
    res: usize,
    buckets: Vec<Vec<u32>>,
}

impl BucketIndex {
    pub fn build(points: &PointSet) -> Self {
        let dim = points.dim();
        let n = points.len().max(1);
        // ~4 points per bucket; memory stays linear in the set size.
        let res = ((n as f64 / 4.0).powf(1.0 / dim as f64).floor() as usize).max(1);
        let mut buckets = vec![Vec::new(); res.pow(dim as u32)];
        for (i, p) in points.iter().enumerate() {
            buckets[Self::bucket_of(p, res)].push(i as u32);
        }
        BucketIndex { dim, res, buckets }
    }

    fn coord_bucket(c: f64, res: usize) -> usize {
        ((c * res as f64) as usize).min(res - 1)
    }

    fn bucket_of(p: &[f64], res: usize) -> usize {
        let mut idx = 0;
        for &c in p {
            idx = idx * res + Self::coord_bucket(c, res);
        }
        idx
    }

    /// Visit every `(index, point)` of `points` with sup-norm distance to
    /// `center` at most `h` (closed window). `points` must be the set the
    /// index was built from.
    pub fn for_each_in_box<F: FnMut(u32, &[f64])>(
        &self,
        points: &PointSet,
        center: &[f64],
        h: f64,
        mut visit: F,
    ) {
        debug_assert_eq!(center.len(), self.dim);
        let res = self.res;
        let mut lo = [0usize; 8];
        let mut hi = [0usize; 8];
        debug_assert!(self.dim <= 8);
        for (j, &c) in center.iter().enumerate() {
            lo[j] = Self::coord_bucket((c - h).max(0.0), res);
            hi[j] = Self::coord_bucket((c + h).min(1.0), res);
        }
        let mut cursor = lo;
        loop {
            let mut idx = 0;
            for j in 0..self.dim {
                idx = idx * res + cursor[j];
            }
            for &i in &self.buckets[idx] {
                let p = points.get(i as usize);
                if linf_dist(p, center) <= h {
                    visit(i, p);
                }
            }
            // Advance the multi-dimensional cursor through [lo, hi].
            let mut j = self.dim;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                if cursor[j] < hi[j] {
                    cursor[j] += 1;
                    break;
                }
                cursor[j] = lo[j];
                if j == 0 {
                    return;
                }
            }
        }
    }

    /// Sup-norm distance from `probe` to the nearest point, with its index.
    /// Returns `None` on an empty set.
    pub fn nearest(&self, points: &PointSet, probe: &[f64]) -> Option<(u32, f64)> {
        if points.is_empty() {
            return None;
        }
        let mut h = 1.0 / self.res as f64;
        loop {
            let mut best: Option<(u32, f64)> = None;
            self.for_each_in_box(points, probe, h, |i, p| {
                let d = linf_dist(p, probe);
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            });
            // A hit within the scanned radius is globally nearest: any
            // closer point would also lie inside the scanned box.
            if let Some((_, d)) = best {
                if d <= h {
                    return best;
                }
            }
            if h >= 1.0 {
                // Scanned the whole cube: the best hit (if any) is exact.
                return best;
            }
            h = (h * 2.0).min(1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn random_set(dim: usize, n: usize, seed: u64) -> PointSet {
        let mut rng = RngStream::from_seed(seed);
        let mut ps = PointSet::with_capacity(dim, n);
        for _ in 0..n {
            ps.push(&rng.uniform_point(dim));
        }
        ps
    }

    #[test]
    fn linf_basics() {
        assert_eq!(linf_dist(&[0.0, 0.0], &[0.3, -0.5]), 0.5);
        assert_eq!(linf_dist(&[1.0], &[1.0]), 0.0);
    }

    #[test]
    fn box_query_matches_linear_scan() {
        for dim in 1..=3 {
            let ps = random_set(dim, 500, 11 + dim as u64);
            let idx = BucketIndex::build(&ps);
            let mut rng = RngStream::from_seed(99);
            for _ in 0..50 {
                let center = rng.uniform_point(dim);
                let h = rng.uniform() * 0.5;
                let mut got: Vec<u32> = Vec::new();
                idx.for_each_in_box(&ps, &center, h, |i, _| got.push(i));
                got.sort_unstable();
                let want: Vec<u32> = ps
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| linf_dist(p, &center) <= h)
                    .map(|(i, _)| i as u32)
                    .collect();
                assert_eq!(got, want, "dim={dim} h={h}");
            }
        }
    }

    #[test]
    fn box_query_handles_boundary_points() {
        let mut ps = PointSet::new(2);
        ps.push(&[1.0, 1.0]);
        ps.push(&[0.0, 0.0]);
        ps.push(&[1.0, 0.0]);
        let idx = BucketIndex::build(&ps);
        let mut seen = Vec::new();
        idx.for_each_in_box(&ps, &[1.0, 1.0], 0.0, |i, _| seen.push(i));
        assert_eq!(seen, vec![0]);
    }

    #[test]
    fn nearest_matches_linear_scan() {
        for dim in 1..=2 {
            let ps = random_set(dim, 300, 7 + dim as u64);
            let idx = BucketIndex::build(&ps);
            let mut rng = RngStream::from_seed(123);
            for _ in 0..100 {
                let probe = rng.uniform_point(dim);
                let (i, d) = idx.nearest(&ps, &probe).unwrap();
                let (want_i, want_d) = ps
                    .iter()
                    .enumerate()
                    .map(|(j, p)| (j as u32, linf_dist(p, &probe)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert_eq!(d.to_bits(), want_d.to_bits());
                assert_eq!(i, want_i);
            }
        }
    }

    #[test]
    fn subset_picks_rows() {
        let ps = random_set(2, 10, 1);
        let sub = ps.subset(&[3, 7]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.get(0), ps.get(3));
        assert_eq!(sub.get(1), ps.get(7));
    }
}
