//! Bandwidth selection and running confidence intervals.
//!
//! The bandwidth rule picks, per query point, the largest candidate
//! bandwidth whose bias bound is still dominated by its deviation bound —
//! the classical bias/variance crossover, evaluated on the error bound of
//! the regression module rather than on unknowable true errors. The
//! resulting fit value plus/minus its total bound feeds a running
//! interval that only ever tightens.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom::linf_dist;
use crate::oracle::SampleLog;
use crate::polyreg::{
    assemble_fit, error_bound, local_fit, ErrorBound, FeatureBasis, LocalFit, RIDGE_TOL,
};

/// How the candidate grid `j / grid_resolution` is searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Scan every candidate from the largest down. The semantic reference;
    /// cost grows linearly with the grid resolution.
    Exhaustive,
    /// Descend over the runs of candidates that share a window (the window
    /// only changes where a sample's distance crosses the grid), probing
    /// one candidate per run and bisecting inside the run that crosses.
    /// Replaces naive doubling so the answer matches the exhaustive scan
    /// while the work scales with the sample count, not the grid.
    Doubling,
}

/// Candidate-bandwidth grid `{j / grid_resolution : j = 1..grid_resolution}`
/// plus the search strategy.
#[derive(Clone, Copy, Debug)]
pub struct BandwidthRule {
    /// Grid denominator; the canonical choice is `n^2` for a budget of `n`.
    pub grid_resolution: u64,
    /// Search strategy; `Doubling` unless diagnosing.
    pub search: SearchMode,
}

impl BandwidthRule {
    /// A rule over `{j/grid_resolution}`.
    pub fn new(grid_resolution: u64, search: SearchMode) -> Result<Self> {
        if grid_resolution == 0 {
            return Err(Error::InvalidParameter("grid_resolution must be positive"));
        }
        Ok(BandwidthRule { grid_resolution, search })
    }

    /// The canonical rule for a query budget of `n`: denominator `n^2`,
    /// fast search.
    pub fn for_budget(n: u64) -> Self {
        let denom = n.saturating_mul(n).max(1);
        BandwidthRule { grid_resolution: denom, search: SearchMode::Doubling }
    }
}

/// The failure probability each interval update is calibrated to:
/// `1 / (n^4 |G_n|)`, so a union bound over all grid points and epochs
/// still vanishes.
pub fn default_delta(n: u64, grid_points: usize) -> f64 {
    debug_assert!(n >= 2 && grid_points >= 1);
    1.0 / ((n as f64).powi(4) * grid_points as f64)
}

/// A selected bandwidth with its fit and error bound.
#[derive(Clone, Debug)]
pub struct Selection {
    /// Chosen bandwidth (a grid candidate).
    pub h: f64,
    /// The local fit at `h`.
    pub fit: LocalFit,
    /// The error bound at `h`; infinite total marks a failed selection.
    pub bound: ErrorBound,
}

/// A candidate is acceptable when its bound certifies anything at all and
/// the bias part is dominated by the deviation part.
fn acceptable(bound: &ErrorBound) -> bool {
    bound.total.is_finite() && bound.bias <= bound.deviation
}

/// Moment sums of one window prefix, enough to rebuild the Gram system at
/// any bandwidth: raw centered monomial products are bandwidth-free, and
/// scaling by `h^{-degree}` per feature recovers the design moments.
struct PrefixMoments {
    /// Cumulative raw Gram (full square), one snapshot per distinct
    /// sample distance, ordered by distance.
    gram: Vec<f64>,
    /// Cumulative raw right-hand side, same snapshots.
    rhs: Vec<f64>,
    /// Distinct distances, ascending.
    distances: Vec<f64>,
    /// Samples at or below each distinct distance.
    counts: Vec<usize>,
}

fn build_prefix_moments(
    basis: &FeatureBasis,
    log: &SampleLog,
    x: &[f64],
) -> PrefixMoments {
    let nf = basis.feature_count();
    let mut order: Vec<(f64, usize)> = (0..log.len())
        .map(|t| (linf_dist(log.point(t), x), t))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut gram = Vec::new();
    let mut rhs = Vec::new();
    let mut distances = Vec::new();
    let mut counts = Vec::new();
    let mut run_gram = vec![0.0; nf * nf];
    let mut run_rhs = vec![0.0; nf];
    let mut row = vec![0.0; nf];
    let mut taken = 0usize;
    let mut i = 0usize;
    while i < order.len() {
        let d = order[i].0;
        // Absorb every sample at this exact distance before snapshotting.
        while i < order.len() && order[i].0 == d {
            let t = order[i].1;
            basis.fill_monomials_scaled(x, 1.0, log.point(t), &mut row);
            let y = log.response(t);
            for a in 0..nf {
                run_rhs[a] += row[a] * y;
                for b in 0..nf {
                    run_gram[a * nf + b] += row[a] * row[b];
                }
            }
            taken += 1;
            i += 1;
        }
        gram.extend_from_slice(&run_gram);
        rhs.extend_from_slice(&run_rhs);
        distances.push(d);
        counts.push(taken);
    }
    PrefixMoments { gram, rhs, distances, counts }
}

impl PrefixMoments {
    /// Fit and bound at bandwidth `h` from the snapshot of every sample
    /// within distance `h`.
    fn evaluate(
        &self,
        basis: &FeatureBasis,
        x: &[f64],
        h: f64,
        holder_m: f64,
        alpha: f64,
        delta: f64,
    ) -> (LocalFit, ErrorBound) {
        let nf = basis.feature_count();
        let snap = self.distances.partition_point(|&d| d <= h);
        if snap == 0 {
            let fit = assemble_fit(basis, &vec![0.0; nf * nf], &vec![0.0; nf], 0, x, h, RIDGE_TOL);
            let bound = error_bound(basis, &fit, holder_m, alpha, delta);
            return (fit, bound);
        }
        let m = self.counts[snap - 1];
        let raw_gram = &self.gram[(snap - 1) * nf * nf..snap * nf * nf];
        let raw_rhs = &self.rhs[(snap - 1) * nf..snap * nf];
        let scale = basis.inv_h_powers(h);
        let mut gram = vec![0.0; nf * nf];
        let mut rhs = vec![0.0; nf];
        for a in 0..nf {
            rhs[a] = raw_rhs[a] * scale[a];
            for b in 0..nf {
                gram[a * nf + b] = raw_gram[a * nf + b] * scale[a] * scale[b];
            }
        }
        let fit = assemble_fit(basis, &gram, &rhs, m, x, h, RIDGE_TOL);
        let bound = error_bound(basis, &fit, holder_m, alpha, delta);
        (fit, bound)
    }
}

/// Pick a bandwidth for the window at `x` from the log.
///
/// Semantics (both search modes): the largest grid candidate whose bias
/// bound does not exceed its deviation bound; if no candidate qualifies,
/// the smallest candidate whose window holds at least one sample (its
/// bound may be infinite); if the log is empty, a failure marker with an
/// unusable fit and an infinite bound.
pub fn select_bandwidth(
    rule: &BandwidthRule,
    log: &SampleLog,
    basis: &FeatureBasis,
    x: &[f64],
    holder_m: f64,
    alpha: f64,
    delta: f64,
) -> Selection {
    match rule.search {
        SearchMode::Exhaustive => {
            select_exhaustive(rule.grid_resolution, log, basis, x, holder_m, alpha, delta)
        }
        SearchMode::Doubling => {
            select_by_runs(rule.grid_resolution, log, basis, x, holder_m, alpha, delta)
        }
    }
}

fn select_exhaustive(
    denom: u64,
    log: &SampleLog,
    basis: &FeatureBasis,
    x: &[f64],
    holder_m: f64,
    alpha: f64,
    delta: f64,
) -> Selection {
    let denom_f = denom as f64;
    for j in (1..=denom).rev() {
        let h = j as f64 / denom_f;
        let fit = local_fit(basis, log, x, h, RIDGE_TOL);
        let bound = error_bound(basis, &fit, holder_m, alpha, delta);
        if acceptable(&bound) {
            return Selection { h, fit, bound };
        }
    }
    for j in 1..=denom {
        let h = j as f64 / denom_f;
        let fit = local_fit(basis, log, x, h, RIDGE_TOL);
        if fit.usable {
            let bound = error_bound(basis, &fit, holder_m, alpha, delta);
            return Selection { h, fit, bound };
        }
    }
    failure_marker(denom, basis, x, holder_m, alpha, delta)
}

fn failure_marker(
    denom: u64,
    basis: &FeatureBasis,
    x: &[f64],
    holder_m: f64,
    alpha: f64,
    delta: f64,
) -> Selection {
    let nf = basis.feature_count();
    let h = 1.0 / denom as f64;
    let fit = assemble_fit(basis, &vec![0.0; nf * nf], &vec![0.0; nf], 0, x, h, RIDGE_TOL);
    let bound = error_bound(basis, &fit, holder_m, alpha, delta);
    Selection { h, fit, bound }
}

fn select_by_runs(
    denom: u64,
    log: &SampleLog,
    basis: &FeatureBasis,
    x: &[f64],
    holder_m: f64,
    alpha: f64,
    delta: f64,
) -> Selection {
    if log.is_empty() {
        return failure_marker(denom, basis, x, holder_m, alpha, delta);
    }
    let moments = build_prefix_moments(basis, log, x);
    let denom_f = denom as f64;

    // Smallest candidate whose window contains the sample at each distinct
    // distance: the starts of the runs of j sharing a window. Distances
    // falling inside the same grid step collapse into one start whose
    // window count is the largest of the folded snapshots.
    let mut starts: Vec<u64> = Vec::with_capacity(moments.distances.len());
    let mut start_counts: Vec<usize> = Vec::with_capacity(moments.distances.len());
    for (i, &d) in moments.distances.iter().enumerate() {
        let mut j = (d * denom_f).ceil() as u64;
        j = j.clamp(1, denom);
        // Align against the probe's own comparison (d <= j/denom).
        while j < denom && (j as f64 / denom_f) < d {
            j += 1;
        }
        if (j as f64 / denom_f) < d {
            continue; // unreachable beyond the top candidate
        }
        if starts.last() == Some(&j) {
            *start_counts.last_mut().unwrap() = moments.counts[i];
        } else {
            starts.push(j);
            start_counts.push(moments.counts[i]);
        }
    }
    if starts.is_empty() {
        // Every sample is further than the largest candidate reaches.
        return failure_marker(denom, basis, x, holder_m, alpha, delta);
    }

    let probe = |j: u64| -> (LocalFit, ErrorBound) {
        moments.evaluate(basis, x, j as f64 / denom_f, holder_m, alpha, delta)
    };

    // Provable prefilter. The constant feature's diagonal entry of Gram/m
    // is exactly 1, so sigma <= 1 at every candidate, which lower-bounds
    // the bias/deviation ratio by
    //     q = b * M * d^k * h^alpha * sqrt(m / (5 * nf * ln(1/delta))).
    // q only grows with the candidate (h and m both do), so every run
    // whose start has q > 1 is unacceptable outright; binary-search the
    // highest run start with q <= 1.
    let nf = basis.feature_count() as f64;
    let l_delta = (1.0 / delta).ln();
    let q_factor = basis.b_bound()
        * holder_m
        * (basis.dim() as f64).powi(basis.degree() as i32)
        / (5.0 * nf * l_delta).sqrt();
    let q_at = |idx: usize| -> f64 {
        let h = starts[idx] as f64 / denom_f;
        q_factor * h.powf(alpha) * (start_counts[idx] as f64).sqrt()
    };
    let top = {
        let (mut lo, mut hi) = (0usize, starts.len() - 1);
        if q_at(lo) > 1.0 {
            // Even the smallest usable window is provably bias-dominated.
            let (fit, bound) = probe(starts[0]);
            return Selection { h: starts[0] as f64 / denom_f, fit, bound };
        }
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if q_at(mid) <= 1.0 {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };

    // Hunt for the highest acceptable run at or below `top`. Small run
    // counts get an exact descending scan; large ones a bisection that
    // relies on the empirical interval shape of acceptability (too little
    // data below, bias-dominated above), which the equality-vs-exhaustive
    // tests exercise on both paths.
    const LINEAR_RUN_SCAN: usize = 512;
    let found = if top < LINEAR_RUN_SCAN {
        (0..=top).rev().find(|&idx| {
            let (_, bound) = probe(starts[idx]);
            acceptable(&bound)
        })
    } else {
        let (mut lo, mut hi) = (0usize, top);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            let (_, bound) = probe(starts[mid]);
            if bound.total.is_finite() && !acceptable(&bound) {
                hi = mid - 1; // bias-dominated: move down
            } else {
                lo = mid; // acceptable, or too sparse to fit: move up
            }
        }
        let (_, bound) = probe(starts[lo]);
        if acceptable(&bound) {
            Some(lo)
        } else {
            None
        }
    };

    if let Some(idx) = found {
        // Within the run the window is fixed and the bias grows with h, so
        // acceptability holds on a prefix: bisect for its end.
        let start = starts[idx];
        let run_end = if idx + 1 < starts.len() { starts[idx + 1] - 1 } else { denom };
        let (mut lo, mut hi) = (start, run_end);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            let (_, bound) = probe(mid);
            if acceptable(&bound) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let (fit, bound) = probe(lo);
        return Selection { h: lo as f64 / denom_f, fit, bound };
    }

    // Nothing acceptable anywhere: smallest usable candidate.
    let j = starts[0];
    let (fit, bound) = probe(j);
    Selection { h: j as f64 / denom_f, fit, bound }
}

/// Running confidence interval for the objective value at one grid point.
///
/// The raw bounds only ever tighten; once they cross, the record is
/// flagged and both effective bounds collapse to the midpoint of the
/// crossed pair, which is how later consumers are meant to read it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CIRecord {
    raw_lower: f64,
    raw_upper: f64,
    /// Bandwidth behind the most recent effective update.
    pub last_bandwidth: f64,
    /// Bound behind the most recent effective update.
    pub last_bound: Option<ErrorBound>,
    /// Number of effective (finite-bound) updates applied.
    pub updates: u32,
}

/// Result of [`crossing_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingStatus {
    /// `lower <= upper`: the interval is still a genuine interval.
    Uncrossed,
    /// `lower > upper`: some update must have missed the truth (a
    /// delta-probability event per update, or a model violation).
    Crossed,
}

impl Default for CIRecord {
    fn default() -> Self {
        Self::new()
    }
}

impl CIRecord {
    /// The vacuous interval `(-inf, +inf)`.
    pub fn new() -> Self {
        CIRecord {
            raw_lower: f64::NEG_INFINITY,
            raw_upper: f64::INFINITY,
            last_bandwidth: f64::NAN,
            last_bound: None,
            updates: 0,
        }
    }

    /// Monotone lower bound as accumulated, even if crossed.
    pub fn raw_lower(&self) -> f64 {
        self.raw_lower
    }

    /// Monotone upper bound as accumulated, even if crossed.
    pub fn raw_upper(&self) -> f64 {
        self.raw_upper
    }

    /// Effective lower bound: the midpoint once crossed.
    pub fn lower(&self) -> f64 {
        if self.is_crossed() {
            0.5 * (self.raw_lower + self.raw_upper)
        } else {
            self.raw_lower
        }
    }

    /// Effective upper bound: the midpoint once crossed.
    pub fn upper(&self) -> f64 {
        if self.is_crossed() {
            0.5 * (self.raw_lower + self.raw_upper)
        } else {
            self.raw_upper
        }
    }

    /// True when the raw bounds have crossed.
    pub fn is_crossed(&self) -> bool {
        self.raw_lower > self.raw_upper
    }
}

/// Intersect `record` with `fit_value ± bound.total`. An infinite bound
/// leaves the record untouched; otherwise the lower bound can only rise
/// and the upper bound can only fall.
pub fn update_ci(
    record: &CIRecord,
    fit_value: f64,
    bandwidth: f64,
    bound: &ErrorBound,
) -> CIRecord {
    if !bound.total.is_finite() {
        return *record;
    }
    CIRecord {
        raw_lower: record.raw_lower.max(fit_value - bound.total),
        raw_upper: record.raw_upper.min(fit_value + bound.total),
        last_bandwidth: bandwidth,
        last_bound: Some(*bound),
        updates: record.updates + 1,
    }
}

/// Report whether the record's raw bounds have crossed.
pub fn crossing_check(record: &CIRecord) -> CrossingStatus {
    if record.is_crossed() {
        CrossingStatus::Crossed
    } else {
        CrossingStatus::Uncrossed
    }
}
