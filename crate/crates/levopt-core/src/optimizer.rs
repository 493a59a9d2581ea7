//! Grid construction, pre-screening, the active successive-rejection
//! optimizer, and the passive sample-then-fit baseline.
//!
//! The active loop splits its budget into `T = floor(log2 n)` epochs,
//! samples each epoch uniformly from the extension of the surviving set,
//! refreshes every survivor's confidence interval from the cumulative
//! sample log, rejects points whose interval floor exceeds the best
//! interval ceiling, and shrinks each survivor's sampling radius to its
//! selected bandwidth. Smoothness parameters default to the oracle
//! objective's own declaration; overriding them is how mismatch
//! experiments are run.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::ci::{default_delta, select_bandwidth, update_ci, BandwidthRule, CIRecord};
use crate::error::{Error, Result};
use crate::geom::{BucketIndex, Point, PointSet};
use crate::oracle::NoisyOracle;
use crate::polyreg::{local_fit, FeatureBasis, RIDGE_TOL};
use crate::rng::RngStream;

/// Sampling density for grid construction, bounded above and below on the
/// unit cube so covering arguments stay valid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridDensity {
    /// Uniform on `[0,1]^d`.
    Uniform,
    /// Independent per-coordinate density `1 + weight*(1 - 2 z_j)`,
    /// linearly over-weighting small coordinates; bounded in
    /// `[1-weight, 1+weight]` per coordinate. `weight` in `[0, 1)`.
    LinearTilt {
        /// Tilt strength; 0 recovers the uniform density.
        weight: f64,
    },
}

/// Draw `grid_size` i.i.d. points from `density` on `[0,1]^d`.
pub fn build_grid(
    grid_size: usize,
    dim: usize,
    density: GridDensity,
    rng: &mut RngStream,
) -> PointSet {
    debug_assert!(dim >= 1);
    let mut points = PointSet::with_capacity(dim, grid_size);
    let mut buf = vec![0.0; dim];
    for _ in 0..grid_size {
        match density {
            GridDensity::Uniform => {
                for c in buf.iter_mut() {
                    *c = rng.uniform();
                }
            }
            GridDensity::LinearTilt { weight } => {
                debug_assert!((0.0..1.0).contains(&weight));
                let w = weight.clamp(0.0, 1.0 - 1e-12);
                for c in buf.iter_mut() {
                    let u = rng.uniform();
                    *c = if w == 0.0 {
                        u
                    } else {
                        // Inverse CDF of 1 + w(1-2z): F(z) = (1+w)z - w z^2.
                        let s = (1.0 + w) * (1.0 + w) - 4.0 * w * u;
                        ((1.0 + w) - s.sqrt()) / (2.0 * w)
                    };
                }
            }
        }
        points.push(&buf);
    }
    points
}

/// Indices of grid points within `radii[i]` (sup-norm) of `centers[i]` for
/// some `i`: the extension of the active set. An infinite radius floods
/// the whole grid.
pub fn extension_set(centers: &PointSet, radii: &[f64], grid: &PointSet) -> Vec<u32> {
    debug_assert_eq!(centers.dim(), grid.dim());
    debug_assert_eq!(centers.len(), radii.len());
    if centers.iter().count() > 0 && radii.iter().any(|r| r.is_infinite()) {
        return (0..grid.len() as u32).collect();
    }
    let index = BucketIndex::build(grid);
    let mut hit = vec![false; grid.len()];
    for (c, &r) in centers.iter().zip(radii) {
        index.for_each_in_box(grid, c, r, |i, _| hit[i as usize] = true);
    }
    hit.iter()
        .enumerate()
        .filter_map(|(i, &h)| if h { Some(i as u32) } else { None })
        .collect()
}

/// Outcome of the pre-screening pass.
#[derive(Clone, Debug)]
pub struct PrescreenOutcome {
    /// Grid indices that survive (empty-window points are always kept).
    pub retained: Vec<u32>,
    /// Queries spent: `floor(n / ln n)`.
    pub queries: u64,
    /// Averaging radius actually used.
    pub h0: f64,
    /// Removal margin above the smallest local mean: `1 / ln n`.
    pub threshold: f64,
    /// Local mean per grid point; NaN where the window held no samples.
    pub means: Vec<f64>,
}

/// Crude local-averaging pass: spend `floor(n / ln n)` uniform queries,
/// average them over a sup-norm window of radius `h0` around each grid
/// point, and drop every point whose average exceeds the best average by
/// `1 / ln n`. Points whose window is empty are retained — absence of
/// evidence is not evidence for removal.
///
/// The canonical radius `min(1, n_pre^{-1/(2d)} ln^3 n)` clips to 1 for
/// every practically runnable budget (it needs `n_pre > ln^{6d} n` to be
/// informative), in which case every window holds every sample and
/// nothing is removed; `h0_override` substitutes an explicit radius.
pub fn prescreen(
    oracle: &mut NoisyOracle,
    grid: &PointSet,
    n: u64,
    h0_override: Option<f64>,
    rng: &mut RngStream,
) -> Result<PrescreenOutcome> {
    if n < 2 {
        return Err(Error::InvalidParameter("prescreen needs a budget of at least 2"));
    }
    if grid.is_empty() {
        return Err(Error::EmptySet);
    }
    let dim = grid.dim();
    let log_n = (n as f64).ln();
    let n_pre = ((n as f64 / log_n).floor() as u64).max(1);
    let threshold = 1.0 / log_n;
    let h0 = match h0_override {
        Some(h) => {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidParameter("prescreen radius must be positive"));
            }
            h
        }
        None => ((n_pre as f64).powf(-1.0 / (2.0 * dim as f64)) * log_n.powi(3)).min(1.0),
    };

    let mut samples = PointSet::with_capacity(dim, n_pre as usize);
    let mut responses = Vec::with_capacity(n_pre as usize);
    for _ in 0..n_pre {
        let z = rng.uniform_point(dim);
        let y = oracle.query(&z)?;
        samples.push(&z);
        responses.push(y);
    }

    let index = BucketIndex::build(&samples);
    let mut means = Vec::with_capacity(grid.len());
    let mut best = f64::INFINITY;
    for x in grid.iter() {
        let (mut sum, mut count) = (0.0, 0usize);
        index.for_each_in_box(&samples, x, h0, |i, _| {
            sum += responses[i as usize];
            count += 1;
        });
        let mean = if count > 0 { sum / count as f64 } else { f64::NAN };
        if mean.is_finite() && mean < best {
            best = mean;
        }
        means.push(mean);
    }

    let retained = (0..grid.len() as u32)
        .filter(|&i| {
            let m = means[i as usize];
            m.is_nan() || m < best + threshold
        })
        .collect();
    Ok(PrescreenOutcome { retained, queries: n_pre, h0, threshold, means })
}

/// Knobs for one optimizer run. Smoothness fields left `None` inherit the
/// oracle objective's declaration.
#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    /// Total query budget.
    pub n: u64,
    /// Grid cardinality used when the caller builds the grid; also the
    /// default scale for the CI failure probability.
    pub grid_size: usize,
    /// Declared smoothness exponent; `None` inherits the objective's.
    pub alpha: Option<f64>,
    /// Declared Holder constant; `None` inherits the objective's.
    pub holder_m: Option<f64>,
    /// Declared level-set ceiling; `None` inherits the objective's.
    pub kappa: Option<f64>,
    /// Per-update CI failure probability; `None` means `1/(n^4 |G|)`.
    pub delta: Option<f64>,
    /// Run the pre-screening pass (skipped regardless when kappa is
    /// infinite — nothing needs protecting then).
    pub prescreen: bool,
    /// Explicit pre-screen averaging radius (see [`prescreen`]).
    pub prescreen_h0: Option<f64>,
    /// Seed for the run's internal sampling decisions (grid-independent).
    pub seed: u64,
    /// Override the epoch count `T = floor(log2 n)`.
    pub epochs_override: Option<u32>,
    /// Return the literal last query point instead of the interval argmin.
    pub output_last_query: bool,
    /// Passive baseline bandwidth scale `c_h` in
    /// `h = c_h (ln n / n)^{1/(2 alpha + d)}`.
    pub passive_bandwidth_scale: f64,
    /// Record per-epoch active sets and radii into the result (for
    /// structural audits; costs memory proportional to epochs x grid).
    pub record_sets: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            n: 1024,
            grid_size: 4096,
            alpha: None,
            holder_m: None,
            kappa: None,
            delta: None,
            prescreen: true,
            prescreen_h0: None,
            seed: 0,
            epochs_override: None,
            output_last_query: false,
            passive_bandwidth_scale: 1.0,
            record_sets: false,
        }
    }
}

/// One epoch of the active run, as recorded in the trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStat {
    /// Epoch number, 1-based.
    pub epoch: u32,
    /// Survivors after this epoch's elimination.
    pub active: usize,
    /// Largest error bound among the points refreshed this epoch
    /// (infinite when some survivor's window was still too sparse).
    pub max_eta: f64,
    /// The elimination threshold: the smallest interval ceiling.
    pub min_upper: f64,
    /// Queries spent this epoch.
    pub queries: u64,
}

/// Outcome of an optimizer run.
#[derive(Clone, Debug)]
pub struct RunResult {
    /// The returned minimizer candidate.
    pub x_hat: Point,
    /// Queries actually spent by this run.
    pub queries: u64,
    /// Epochs executed (1 for the passive baseline).
    pub epochs: u32,
    /// Per-epoch statistics (empty for the passive baseline).
    pub trace: Vec<EpochStat>,
    /// Grid indices still active after the final epoch (empty for the
    /// passive baseline).
    pub active: Vec<u32>,
    /// Final per-grid-point intervals (empty for the passive baseline).
    pub ci: Vec<CIRecord>,
    /// Active set after each epoch, recorded only under
    /// `config.record_sets`.
    pub epoch_active: Vec<Vec<u32>>,
    /// Per-grid-point radii after each epoch, recorded only under
    /// `config.record_sets`.
    pub epoch_radii: Vec<Vec<f64>>,
    /// Declared-smoothness bound on the value error from optimizing over
    /// the grid instead of the cube: `M * spacing^min(alpha,1)` with the
    /// spacing estimated by random probes.
    pub grid_resolution_err: f64,
    /// Queries the pre-screening pass spent (0 when skipped).
    pub prescreen_queries: u64,
    /// Grid points the pre-screening pass removed.
    pub prescreen_removed: usize,
}

struct Resolved {
    alpha: f64,
    holder_m: f64,
    kappa: f64,
    delta: f64,
    epochs: u32,
}

fn resolve(config: &OptimizerConfig, oracle: &NoisyOracle, grid: &PointSet) -> Result<Resolved> {
    if grid.is_empty() {
        return Err(Error::EmptySet);
    }
    let objective = oracle.objective();
    if grid.dim() != objective.dim {
        return Err(Error::DimensionMismatch { expected: objective.dim, got: grid.dim() });
    }
    if config.n < 2 {
        return Err(Error::InvalidParameter("budget must be at least 2"));
    }
    let alpha = config.alpha.unwrap_or(objective.alpha);
    let holder_m = config.holder_m.unwrap_or(objective.holder_m);
    let kappa = config.kappa.unwrap_or(objective.kappa);
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter("alpha must be positive and finite"));
    }
    if !(holder_m > 0.0) || !holder_m.is_finite() {
        return Err(Error::InvalidParameter("holder_m must be positive and finite"));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter("kappa must be positive"));
    }
    let delta = match config.delta {
        Some(d) => {
            if !(d > 0.0 && d < 0.5) {
                return Err(Error::InvalidParameter("delta must lie in (0, 0.5)"));
            }
            d
        }
        None => default_delta(config.n, grid.len()),
    };
    let epochs = match config.epochs_override {
        Some(t) if t >= 1 => t,
        Some(_) => return Err(Error::InvalidParameter("epoch override must be positive")),
        None => config.n.ilog2(),
    };
    if !(config.passive_bandwidth_scale > 0.0) || !config.passive_bandwidth_scale.is_finite() {
        return Err(Error::InvalidParameter("bandwidth scale must be positive and finite"));
    }
    Ok(Resolved { alpha, holder_m, kappa, delta, epochs })
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Declared-smoothness value error of the best grid point, estimated by
/// probing random cube points for their nearest grid neighbor.
fn grid_resolution_err(
    grid: &PointSet,
    index: &BucketIndex,
    holder_m: f64,
    alpha: f64,
    seed: u64,
) -> f64 {
    let mut rng = RngStream::substream(seed, &[0x6e57]);
    let mut worst = 0.0f64;
    for _ in 0..512 {
        let probe = rng.uniform_point(grid.dim());
        if let Some((_, d)) = index.nearest(grid, &probe) {
            worst = worst.max(d);
        }
    }
    holder_m * worst.powf(alpha.min(1.0))
}

/// Run the epoch-based successive-rejection optimizer against `oracle` on
/// `grid`.
///
/// Budget layout: when pre-screening runs (finite declared kappa and
/// `config.prescreen`), it spends `floor(n / ln n)` first; the remainder
/// is split into `T` epochs of equal size, so the total never exceeds
/// `n`. Confidence intervals are refreshed for every surviving point at
/// each epoch's end from the oracle's cumulative log, and only finite
/// error bounds update intervals or shrink sampling radii — a point whose
/// window is still too sparse to certify anything is neither eliminated
/// nor constrained.
pub fn run_active(
    oracle: &mut NoisyOracle,
    grid: &PointSet,
    config: &OptimizerConfig,
) -> Result<RunResult> {
    let resolved = resolve(config, oracle, grid)?;
    let n = config.n;
    if oracle.remaining() < n {
        return Err(Error::BudgetExhausted { budget: oracle.remaining(), requested: n });
    }
    let dim = grid.dim();
    let used_at_entry = oracle.used();
    let basis = FeatureBasis::for_alpha(dim, resolved.alpha);
    let rule = BandwidthRule::for_budget(n);
    let grid_index = BucketIndex::build(grid);

    let mut active: Vec<u32> = (0..grid.len() as u32).collect();
    let mut prescreen_queries = 0u64;
    let mut prescreen_removed = 0usize;
    if config.prescreen && resolved.kappa.is_finite() {
        let mut pre_rng = RngStream::substream(config.seed, &[0x97e5]);
        let outcome = prescreen(oracle, grid, n, config.prescreen_h0, &mut pre_rng)?;
        prescreen_queries = outcome.queries;
        prescreen_removed = grid.len() - outcome.retained.len();
        active = outcome.retained;
        debug_assert!(!active.is_empty());
    }

    let epoch_budget = n - prescreen_queries;
    let epochs = resolved.epochs;
    if epoch_budget < epochs as u64 {
        return Err(Error::InvalidParameter("budget cannot cover one query per epoch"));
    }
    let n0 = epoch_budget / epochs as u64;

    let mut radii = vec![f64::INFINITY; grid.len()];
    let mut ci = vec![CIRecord::new(); grid.len()];
    let mut trace = Vec::with_capacity(epochs as usize);
    let mut epoch_active: Vec<Vec<u32>> = Vec::new();
    let mut epoch_radii: Vec<Vec<f64>> = Vec::new();
    let mut last_query: Point = grid.get(active[0] as usize).to_vec();

    for epoch in 1..=epochs {
        let active_radii: Vec<f64> = active.iter().map(|&i| radii[i as usize]).collect();
        let extension = extension_set(&grid.subset(&active), &active_radii, grid);
        let extension_points = grid.subset(&extension);
        let batch = oracle.batch_uniform(&extension_points, n0)?;
        if let Some((p, _)) = batch.last() {
            last_query = p.clone();
        }

        let log = oracle.log();
        let mut max_eta = f64::NEG_INFINITY;
        for &i in &active {
            let x = grid.get(i as usize);
            let sel = select_bandwidth(
                &rule,
                log,
                &basis,
                x,
                resolved.holder_m,
                resolved.alpha,
                resolved.delta,
            );
            max_eta = max_eta.max(sel.bound.total);
            if sel.bound.total.is_finite() {
                let value = sel.fit.coeffs[0];
                ci[i as usize] = update_ci(&ci[i as usize], value, sel.h, &sel.bound);
                radii[i as usize] = radii[i as usize].min(sel.h);
            }
        }

        let min_upper = active
            .iter()
            .map(|&i| ci[i as usize].upper())
            .fold(f64::INFINITY, f64::min);
        let survivors: Vec<u32> = active
            .iter()
            .copied()
            .filter(|&i| ci[i as usize].lower() <= min_upper)
            .collect();
        // The point attaining min_upper has lower <= upper = min_upper
        // (crossed records collapse to their midpoint), so the active set
        // cannot empty out.
        assert!(!survivors.is_empty(), "active set emptied at epoch {epoch}");
        trace.push(EpochStat {
            epoch,
            active: survivors.len(),
            max_eta,
            min_upper,
            queries: n0,
        });
        active = survivors;
        if config.record_sets {
            epoch_active.push(active.clone());
            epoch_radii.push(radii.clone());
        }
    }

    let x_hat = if config.output_last_query {
        last_query
    } else {
        let mut best = active[0] as usize;
        for &i in &active[1..] {
            let i = i as usize;
            let (ui, li) = (ci[i].upper(), ci[i].lower());
            let (ub, lb) = (ci[best].upper(), ci[best].lower());
            let better = ui < ub
                || (ui == ub
                    && (li < lb || (li == lb && lex_less(grid.get(i), grid.get(best)))));
            if better {
                best = i;
            }
        }
        grid.get(best).to_vec()
    };

    let queries = oracle.used() - used_at_entry;
    debug_assert_eq!(queries, prescreen_queries + epochs as u64 * n0);
    Ok(RunResult {
        x_hat,
        queries,
        epochs,
        trace,
        active,
        ci,
        epoch_active,
        epoch_radii,
        grid_resolution_err: grid_resolution_err(
            grid,
            &grid_index,
            resolved.holder_m,
            resolved.alpha,
            config.seed,
        ),
        prescreen_queries,
        prescreen_removed,
    })
}

/// Passive baseline: spend the whole budget on i.i.d. uniform queries,
/// reconstruct the objective at every grid point by one local fit with the
/// classical global bandwidth `c_h (ln n / n)^{1/(2 alpha + d)}`, and
/// return the grid argmin of the reconstruction (ties lexicographic).
pub fn run_passive(
    oracle: &mut NoisyOracle,
    grid: &PointSet,
    config: &OptimizerConfig,
) -> Result<RunResult> {
    let resolved = resolve(config, oracle, grid)?;
    let n = config.n;
    if oracle.remaining() < n {
        return Err(Error::BudgetExhausted { budget: oracle.remaining(), requested: n });
    }
    let dim = grid.dim();
    let used_at_entry = oracle.used();
    let basis = FeatureBasis::for_alpha(dim, resolved.alpha);
    let h = config.passive_bandwidth_scale
        * ((n as f64).ln() / n as f64).powf(1.0 / (2.0 * resolved.alpha + dim as f64));

    let mut rng = RngStream::substream(config.seed, &[0x9a55]);
    for _ in 0..n {
        let z = rng.uniform_point(dim);
        oracle.query(&z)?;
    }

    let log = oracle.log();
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in grid.iter().enumerate() {
        let fit = local_fit(&basis, log, x, h, RIDGE_TOL);
        let value = if fit.usable { fit.coeffs[0] } else { f64::INFINITY };
        let replace = match best {
            None => true,
            Some((bi, bv)) => {
                value < bv || (value == bv && lex_less(x, grid.get(bi)))
            }
        };
        if replace {
            best = Some((i, value));
        }
    }
    let best_index = best.expect("grid is nonempty").0;

    let grid_index = BucketIndex::build(grid);
    Ok(RunResult {
        x_hat: grid.get(best_index).to_vec(),
        queries: oracle.used() - used_at_entry,
        epochs: 1,
        trace: Vec::new(),
        active: Vec::new(),
        ci: Vec::new(),
        epoch_active: Vec::new(),
        epoch_radii: Vec::new(),
        grid_resolution_err: grid_resolution_err(
            grid,
            &grid_index,
            resolved.holder_m,
            resolved.alpha,
            config.seed,
        ),
        prescreen_queries: 0,
        prescreen_removed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::in_unit_cube;
    use crate::testbed::{
        constant_family, strongly_convex_family, two_valley_family, FunctionSpec,
    };
    use approx::assert_relative_eq;

    fn quadratic_d1(center: f64) -> FunctionSpec {
        strongly_convex_family(1, 2.0, &[center]).unwrap()
    }

    #[test]
    fn grid_of_one_lies_in_the_cube() {
        let mut rng = RngStream::from_seed(5);
        let g = build_grid(1, 3, GridDensity::Uniform, &mut rng);
        assert_eq!(g.len(), 1);
        assert!(in_unit_cube(g.get(0)));
    }

    #[test]
    fn uniform_grid_cdf_is_near_identity() {
        let mut rng = RngStream::from_seed(11);
        let g = build_grid(100_000, 1, GridDensity::Uniform, &mut rng);
        let mut v: Vec<f64> = g.iter().map(|p| p[0]).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mut sup = 0.0f64;
        for (i, &z) in v.iter().enumerate() {
            sup = sup.max((z - i as f64 / n).abs());
            sup = sup.max(((i + 1) as f64 / n - z).abs());
        }
        assert!(sup <= 0.006, "DKW sup-distance {sup}");
    }

    #[test]
    fn same_seed_rebuilds_the_same_grid() {
        let a = build_grid(500, 2, GridDensity::Uniform, &mut RngStream::substream(9, &[4]));
        let b = build_grid(500, 2, GridDensity::Uniform, &mut RngStream::substream(9, &[4]));
        let c = build_grid(500, 2, GridDensity::Uniform, &mut RngStream::substream(9, &[5]));
        assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            assert_eq!(a.get(i), b.get(i));
        }
        assert!((0..c.len()).any(|i| a.get(i) != c.get(i)));
    }

    #[test]
    fn tilted_grid_shifts_mass_toward_zero() {
        let mut rng = RngStream::from_seed(13);
        let g = build_grid(20_000, 1, GridDensity::LinearTilt { weight: 0.8 }, &mut rng);
        let mean: f64 = g.iter().map(|p| p[0]).sum::<f64>() / g.len() as f64;
        assert!(g.iter().all(in_unit_cube));
        // E[z] = 1/2 - w/6 ~ 0.3667 at w = 0.8.
        assert!((mean - (0.5 - 0.8 / 6.0)).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn infinite_radius_floods_the_grid() {
        let grid = PointSet::from_flat(1, vec![0.0, 0.45, 0.55, 0.9]);
        let centers = PointSet::from_flat(1, vec![0.5]);
        let out = extension_set(&centers, &[f64::INFINITY], &grid);
        assert_eq!(out, vec![0, 1, 2, 3]);
    }

    #[test]
    fn extension_filters_by_distance() {
        let grid = PointSet::from_flat(1, vec![0.0, 0.45, 0.55, 0.9]);
        let centers = PointSet::from_flat(1, vec![0.5]);
        let out = extension_set(&centers, &[0.1], &grid);
        assert_eq!(out, vec![1, 2]);
    }

    #[test]
    fn extension_contains_its_centers() {
        let mut rng = RngStream::from_seed(21);
        let grid = build_grid(200, 2, GridDensity::Uniform, &mut rng);
        let chosen: Vec<u32> = (0..200).step_by(17).map(|i| i as u32).collect();
        let centers = grid.subset(&chosen);
        let radii = vec![0.05; chosen.len()];
        let out = extension_set(&centers, &radii, &grid);
        for &i in &chosen {
            assert!(out.contains(&i), "center {i} missing from its own extension");
        }
    }

    #[test]
    fn prescreen_keeps_everything_on_flat_noiseless_data() {
        let f = constant_family();
        let grid = build_grid(50, 1, GridDensity::Uniform, &mut RngStream::from_seed(3));
        let mut oracle = NoisyOracle::new(f, 0.0, 10_000, RngStream::from_seed(4));
        let out =
            prescreen(&mut oracle, &grid, 1000, Some(0.05), &mut RngStream::from_seed(5))
                .unwrap();
        assert_eq!(out.retained.len(), 50);
        assert_eq!(out.queries, (1000.0f64 / 1000.0f64.ln()).floor() as u64);
    }

    #[test]
    fn default_radius_clips_and_removes_nothing() {
        // At any runnable budget the canonical radius formula exceeds 1,
        // so every window holds every sample and the means coincide.
        let f = two_valley_family(1, 20.0, 10.0).unwrap();
        let grid = build_grid(64, 1, GridDensity::Uniform, &mut RngStream::from_seed(6));
        let mut oracle = NoisyOracle::new(f, 0.1, 20_000, RngStream::from_seed(7));
        let out = prescreen(&mut oracle, &grid, 10_000, None, &mut RngStream::from_seed(8))
            .unwrap();
        assert_relative_eq!(out.h0, 1.0);
        assert_eq!(out.retained.len(), 64);
    }

    #[test]
    fn prescreen_removes_the_raised_valley() {
        // Raise = 10 dwarfs the removal margin 1/ln(1e4) ~ 0.109 and the
        // noise, so every grid point whose averaging window sits inside
        // the raised half goes, while the minimizer's neighborhood stays.
        let f = two_valley_family(1, 20.0, 10.0).unwrap();
        let grid = build_grid(200, 1, GridDensity::Uniform, &mut RngStream::from_seed(30));
        let h0 = 0.05;
        for seed in 0..20u64 {
            let mut oracle =
                NoisyOracle::new(f.clone(), 0.1, 20_000, RngStream::substream(31, &[seed]));
            let out = prescreen(
                &mut oracle,
                &grid,
                10_000,
                Some(h0),
                &mut RngStream::substream(32, &[seed]),
            )
            .unwrap();
            let kept = |i: u32| out.retained.contains(&i);
            // Interior of the raised valley: windows fully right of the split.
            for i in 0..grid.len() as u32 {
                let z = grid.get(i as usize)[0];
                if z - h0 > 0.5 {
                    assert!(!kept(i), "seed {seed}: raised-valley point {z} survived");
                }
            }
            // Nearest grid point to the global minimizer 0.25 survives.
            let nearest = (0..grid.len())
                .min_by(|&a, &b| {
                    let da = (grid.get(a)[0] - 0.25).abs();
                    let db = (grid.get(b)[0] - 0.25).abs();
                    da.total_cmp(&db)
                })
                .unwrap() as u32;
            assert!(kept(nearest), "seed {seed}: minimizer's neighbor removed");
        }
    }

    #[test]
    fn epoch_arithmetic_matches_the_budget_split() {
        // n = 1000: T = floor(log2 1000) = 9 epochs of floor(1000/9) = 111.
        let f = quadratic_d1(0.3);
        let grid = build_grid(64, 1, GridDensity::Uniform, &mut RngStream::from_seed(40));
        let mut oracle = NoisyOracle::new(f, 1.0, 1000, RngStream::from_seed(41));
        let config = OptimizerConfig { n: 1000, grid_size: 64, ..OptimizerConfig::default() };
        let run = run_active(&mut oracle, &grid, &config).unwrap();
        assert_eq!(run.epochs, 9);
        assert_eq!(run.trace.len(), 9);
        assert!(run.trace.iter().all(|s| s.queries == 111));
        assert_eq!(run.queries, 999);
        assert_eq!(oracle.used(), 999);
        assert_eq!(run.prescreen_queries, 0); // kappa = inf skips it
    }

    #[test]
    fn flat_noiseless_run_keeps_every_point_and_has_zero_regret() {
        let f = constant_family();
        let grid = build_grid(32, 1, GridDensity::Uniform, &mut RngStream::from_seed(50));
        let mut oracle = NoisyOracle::new(f.clone(), 0.0, 256, RngStream::from_seed(51));
        let config = OptimizerConfig { n: 256, grid_size: 32, ..OptimizerConfig::default() };
        let run = run_active(&mut oracle, &grid, &config).unwrap();
        assert!(run.trace.iter().all(|s| s.active == 32), "flat run eliminated points");
        assert_relative_eq!(f.regret(&run.x_hat).unwrap(), 0.0);
        // After the first epoch some interval is finite on both sides.
        assert!(run.trace[0].min_upper.is_finite());
    }

    #[test]
    fn runs_are_deterministic_and_structurally_sound() {
        for (dim, seed) in [(1usize, 0u64), (1, 1), (2, 2), (2, 3)] {
            let center = vec![0.4; dim];
            let f = strongly_convex_family(dim, 2.0, &center).unwrap();
            let grid =
                build_grid(48, dim, GridDensity::Uniform, &mut RngStream::substream(60, &[seed]));
            let config = OptimizerConfig {
                n: 512,
                grid_size: 48,
                seed,
                ..OptimizerConfig::default()
            };
            let run = || {
                let mut oracle =
                    NoisyOracle::new(f.clone(), 1.0, 512, RngStream::substream(61, &[seed]));
                run_active(&mut oracle, &grid, &config).unwrap()
            };
            let a = run();
            let b = run();
            assert_eq!(a.x_hat, b.x_hat);
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.queries, b.queries);
            // Survivor counts never grow; budget is exact.
            for w in a.trace.windows(2) {
                assert!(w[1].active <= w[0].active);
            }
            assert_eq!(a.queries, a.epochs as u64 * a.trace[0].queries);
            assert!(!a.active.is_empty());
            assert!(in_unit_cube(&a.x_hat));
        }
    }

    #[test]
    fn last_query_output_mode_returns_a_grid_point() {
        let f = quadratic_d1(0.3);
        let grid = build_grid(64, 1, GridDensity::Uniform, &mut RngStream::from_seed(70));
        let mut oracle = NoisyOracle::new(f, 1.0, 512, RngStream::from_seed(71));
        let config = OptimizerConfig {
            n: 512,
            grid_size: 64,
            output_last_query: true,
            ..OptimizerConfig::default()
        };
        let run = run_active(&mut oracle, &grid, &config).unwrap();
        assert!(
            grid.iter().any(|p| p == run.x_hat.as_slice()),
            "last query is drawn from the grid"
        );
    }

    #[test]
    fn passive_constant_noiseless_has_zero_regret() {
        let f = constant_family();
        let grid = build_grid(32, 1, GridDensity::Uniform, &mut RngStream::from_seed(80));
        let mut oracle = NoisyOracle::new(f.clone(), 0.0, 128, RngStream::from_seed(81));
        let config = OptimizerConfig { n: 128, grid_size: 32, ..OptimizerConfig::default() };
        let run = run_passive(&mut oracle, &grid, &config).unwrap();
        assert_relative_eq!(f.regret(&run.x_hat).unwrap(), 0.0);
        assert_eq!(run.queries, 128);
    }

    #[test]
    fn passive_reproduces_noiseless_quadratics_exactly() {
        let f = quadratic_d1(0.37);
        let grid = build_grid(64, 1, GridDensity::Uniform, &mut RngStream::from_seed(90));
        let mut oracle = NoisyOracle::new(f.clone(), 0.0, 200, RngStream::from_seed(91));
        let config = OptimizerConfig { n: 200, grid_size: 64, ..OptimizerConfig::default() };
        let run = run_passive(&mut oracle, &grid, &config).unwrap();
        let true_argmin = grid
            .iter()
            .min_by(|a, b| f.eval(a).total_cmp(&f.eval(b)))
            .unwrap();
        assert_eq!(run.x_hat.as_slice(), true_argmin);
    }

    #[test]
    fn passive_regret_decays_at_a_reasonable_rate() {
        // d=1 quadratic target: a degree-2 fit has zero approximation
        // error on a quadratic, so the baseline estimates the vertex at
        // the parametric rate and regret decays roughly like 1/n —
        // faster than the worst-case Holder-class rate -alpha/(2 alpha+d)
        // = -0.4, which only binds when the fit carries real bias. The
        // band below pins the observed parametric decay, boundary-window
        // mixture effects included.
        let f = quadratic_d1(0.3);
        let grid = build_grid(128, 1, GridDensity::Uniform, &mut RngStream::from_seed(100));
        let n_values: [u64; 6] = [512, 1024, 2048, 4096, 8192, 16384];
        let mut points = Vec::new();
        for (ni, &n) in n_values.iter().enumerate() {
            let mut regrets = Vec::new();
            for seed in 0..20u64 {
                let mut oracle = NoisyOracle::new(
                    f.clone(),
                    1.0,
                    n,
                    RngStream::substream(101, &[ni as u64, seed]),
                );
                let config = OptimizerConfig {
                    n,
                    grid_size: 128,
                    seed,
                    ..OptimizerConfig::default()
                };
                let run = run_passive(&mut oracle, &grid, &config).unwrap();
                regrets.push(f.regret(&run.x_hat).unwrap());
            }
            regrets.sort_by(f64::total_cmp);
            let median = 0.5 * (regrets[9] + regrets[10]);
            assert!(median > 0.0, "zero median regret at n={n}");
            points.push(((n as f64).ln(), median.ln()));
        }
        let k = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        assert!(
            (-1.35..=-0.55).contains(&slope),
            "passive log-log slope {slope} outside the parametric band [-1.35, -0.55]"
        );
    }
}
