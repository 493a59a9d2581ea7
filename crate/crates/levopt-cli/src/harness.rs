//! Experiment orchestration: convergence sweeps over `n`, slope
//! estimation on log-log medians, active-vs-passive comparison,
//! adversarial stress runs, and plot-data emission.
//!
//! Everything here is deterministic given (plan, master seed): each sweep
//! cell draws its grid, its noise, and its internal decisions from named
//! substreams tagged by `(purpose, n, seed)` — deliberately *not* by
//! method, so active and passive runs of the same cell see the same grid
//! and the same noise stream and can be compared as matched pairs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use levopt_core::geom::linf_dist;
use levopt_core::optimizer::{
    build_grid, run_active, run_passive, GridDensity, OptimizerConfig, RunResult,
};
use levopt_core::oracle::NoisyOracle;
use levopt_core::rng::{derive_seed, RngStream};
use levopt_core::testbed::{
    constant_family_d, make_adversarial, pack_level_set, power_family,
    solve_eps_n, strongly_convex_family, theoretical_rate, two_valley_family,
    FunctionSpec, RateVariant,
};

const TAG_GRID: u64 = 0x6714;
const TAG_NOISE: u64 = 0x0153;
const TAG_CONFIG: u64 = 0xc0f1;
const TAG_STRESS_PICK: u64 = 0x5e1c;

/// Errors from harness operations.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// An error bubbled up from the core library.
    #[error("{0}")]
    Core(#[from] levopt_core::Error),
    /// Reading or writing an artifact failed.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    /// Not enough data for the requested aggregate.
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    /// The plan or its parameters are invalid.
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

/// Which optimizer a row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Epoch-based successive rejection.
    Active,
    /// Sample-then-fit baseline.
    Passive,
}

impl Method {
    /// Stable lowercase name used in CSV and CLI.
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Active => "active",
            Method::Passive => "passive",
        }
    }

    /// Parse a method name.
    pub fn parse(s: &str) -> Option<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "active" => Some(Method::Active),
            "passive" => Some(Method::Passive),
            _ => None,
        }
    }
}

/// Benchmark families the harness can build by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `f == 0`.
    Constant,
    /// Quadratic bowl.
    StronglyConvex,
    /// Two quadratic valleys, one raised.
    TwoValley,
    /// Homogeneous power growth with a prescribed level-set exponent.
    Power,
}

/// A buildable description of a benchmark objective.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    /// Which family.
    pub kind: FamilyKind,
    /// Ambient dimension.
    pub dim: usize,
    /// Smoothness exponent (power family only; others fix their own).
    pub alpha: f64,
    /// Curvature scale (strongly convex and two-valley).
    pub curvature: f64,
    /// Raise of the decoy valley (two-valley).
    pub raise: f64,
    /// Level-set growth exponent (power family).
    pub beta: f64,
    /// Amplitude scale (power family).
    pub a0: f64,
    /// Bowl center (strongly convex); defaults to the cube center.
    pub center: Option<Vec<f64>>,
}

impl FamilySpec {
    /// Spec for `name` at dimension `dim` with default parameters.
    pub fn named(name: &str, dim: usize) -> Result<FamilySpec, HarnessError> {
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "constant" => FamilyKind::Constant,
            "strongly-convex" => FamilyKind::StronglyConvex,
            "two-valley" => FamilyKind::TwoValley,
            "power" => FamilyKind::Power,
            other => {
                return Err(HarnessError::InvalidPlan(format!(
                    "unknown family `{other}` (expected constant, strongly-convex, two-valley, or power)"
                )))
            }
        };
        Ok(FamilySpec {
            kind,
            dim,
            alpha: 2.0,
            curvature: 2.0,
            raise: 10.0,
            beta: 1.0,
            a0: 1.0,
            center: None,
        })
    }

    /// Build the concrete objective.
    pub fn build(&self) -> Result<FunctionSpec, HarnessError> {
        let f = match self.kind {
            FamilyKind::Constant => constant_family_d(self.dim)?,
            FamilyKind::StronglyConvex => {
                let center = self
                    .center
                    .clone()
                    .unwrap_or_else(|| vec![0.5; self.dim]);
                strongly_convex_family(self.dim, self.curvature, &center)?
            }
            FamilyKind::TwoValley => {
                two_valley_family(self.dim, self.curvature, self.raise)?
            }
            FamilyKind::Power => {
                power_family(self.dim, self.alpha, self.beta, self.a0)?
            }
        };
        Ok(f)
    }
}

/// A full convergence sweep: every (method, n, seed) cell.
#[derive(Clone, Debug)]
pub struct SweepPlan {
    /// Objective to optimize.
    pub family: FamilySpec,
    /// Budgets, strictly increasing, each at least 64.
    pub n_values: Vec<u64>,
    /// Replications per (method, n) cell.
    pub seeds: u64,
    /// Methods to run.
    pub methods: Vec<Method>,
    /// Oracle noise standard deviation.
    pub noise_sd: f64,
    /// Grid cardinality for every cell.
    pub grid_size: usize,
    /// Master seed; all cell substreams derive from it.
    pub master_seed: u64,
    /// CSV destination.
    pub output_path: PathBuf,
    /// Optimizer knobs shared by every cell (n, seed, grid_size are
    /// overwritten per cell).
    pub base_config: OptimizerConfig,
}

impl SweepPlan {
    /// Check the plan invariants.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_values.is_empty() {
            return Err(HarnessError::InvalidPlan("n_values is empty".into()));
        }
        if self.n_values[0] < 64 {
            return Err(HarnessError::InvalidPlan(format!(
                "n_values must each be >= 64, got {}",
                self.n_values[0]
            )));
        }
        if !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(HarnessError::InvalidPlan(
                "n_values must be strictly increasing".into(),
            ));
        }
        if self.seeds < 1 {
            return Err(HarnessError::InvalidPlan("seeds must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::InvalidPlan("no methods selected".into()));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(HarnessError::InvalidPlan("noise_sd must be finite and >= 0".into()));
        }
        if self.grid_size == 0 {
            return Err(HarnessError::InvalidPlan("grid_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// One completed run.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    /// Which optimizer.
    pub method: Method,
    /// Query budget.
    pub n: u64,
    /// Replication seed (0-based within the sweep).
    pub seed: u64,
    /// `f(x_hat) - f*`.
    pub regret: f64,
    /// Queries actually spent.
    pub queries: u64,
    /// Epochs executed.
    pub epochs: u32,
    /// Grid cardinality.
    pub grid_size: usize,
    /// Wall-clock duration of the run in milliseconds. Kept in memory for
    /// diagnostics but deliberately left out of the CSV so reruns under
    /// the same seed stay byte-identical.
    pub wall_ms: u64,
}

/// Fixed CSV column order for experiment rows.
pub const ROW_HEADER: &str = "method,n,seed,regret,queries,epochs,grid_size";

/// Write one row in the fixed column order.
pub fn write_row(w: &mut impl Write, row: &ExperimentRow) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        row.method.as_str(),
        row.n,
        row.seed,
        row.regret,
        row.queries,
        row.epochs,
        row.grid_size
    )
}

/// Execute one (method, n, seed) cell. The grid, the oracle noise, and
/// the optimizer's internal stream are derived from `(master_seed, n,
/// seed)` — not from the method — so method comparisons are paired.
pub fn execute_cell(
    f: &FunctionSpec,
    method: Method,
    n: u64,
    seed: u64,
    noise_sd: f64,
    grid_size: usize,
    master_seed: u64,
    base_config: &OptimizerConfig,
) -> Result<(RunResult, ExperimentRow), HarnessError> {
    let mut grid_rng = RngStream::substream(master_seed, &[TAG_GRID, n, seed]);
    let grid = build_grid(grid_size, f.dim, GridDensity::Uniform, &mut grid_rng);
    let mut oracle = NoisyOracle::new(
        f.clone(),
        noise_sd,
        n,
        RngStream::substream(master_seed, &[TAG_NOISE, n, seed]),
    );
    let config = OptimizerConfig {
        n,
        grid_size,
        seed: derive_seed(master_seed, &[TAG_CONFIG, n, seed]),
        ..base_config.clone()
    };
    let start = Instant::now();
    let run = match method {
        Method::Active => run_active(&mut oracle, &grid, &config)?,
        Method::Passive => run_passive(&mut oracle, &grid, &config)?,
    };
    let wall_ms = start.elapsed().as_millis() as u64;
    let regret = f.regret(&run.x_hat)?;
    let row = ExperimentRow {
        method,
        n,
        seed,
        regret,
        queries: run.queries,
        epochs: run.epochs,
        grid_size,
        wall_ms,
    };
    Ok((run, row))
}

/// Run every (method, n, seed) cell of `plan`, streaming rows to the
/// plan's CSV in deterministic (method, n, seed) order with a flush after
/// every row, and return the rows.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<ExperimentRow>, HarnessError> {
    plan.validate()?;
    let f = plan.family.build()?;
    let mut methods = plan.methods.clone();
    methods.sort();
    methods.dedup();

    let mut out = BufWriter::new(File::create(&plan.output_path)?);
    writeln!(out, "{ROW_HEADER}")?;
    out.flush()?;

    let mut rows = Vec::with_capacity(methods.len() * plan.n_values.len() * plan.seeds as usize);
    for &method in &methods {
        for &n in &plan.n_values {
            for seed in 0..plan.seeds {
                let (_, row) = execute_cell(
                    &f,
                    method,
                    n,
                    seed,
                    plan.noise_sd,
                    plan.grid_size,
                    plan.master_seed,
                    &plan.base_config,
                )?;
                write_row(&mut out, &row)?;
                out.flush()?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Median by sorting; even-length inputs average the two middle values.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// A fitted log-log slope.
#[derive(Clone, Debug)]
pub struct SlopeFit {
    /// OLS slope of `ln(median regret)` against `ln n`.
    pub slope: f64,
    /// OLS intercept.
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    /// Budgets whose median regret was zero and had to be excluded.
    pub excluded: Vec<u64>,
}

/// Ordinary least squares of `ln(median regret per n)` against `ln n` for
/// one method. Zero medians cannot be logged; they are excluded with a
/// warning on stderr. Needs at least 3 surviving distinct budgets.
pub fn fit_slope(rows: &[ExperimentRow], method: Method) -> Result<SlopeFit, HarnessError> {
    let mut per_n: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
    for row in rows.iter().filter(|r| r.method == method) {
        per_n.entry(row.n).or_default().push(row.regret);
    }
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for (&n, regrets) in &per_n {
        let m = median(regrets);
        if m > 0.0 {
            points.push(((n as f64).ln(), m.ln()));
        } else {
            eprintln!(
                "warning: median regret at n={n} for {} is zero; excluded from the slope fit",
                method.as_str()
            );
            excluded.push(n);
        }
    }
    if points.len() < 3 {
        return Err(HarnessError::InsufficientData(
            "slope fit needs at least 3 distinct budgets with nonzero median regret",
        ));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let dof = (points.len() as f64 - 2.0).max(1.0);
    let stderr = (rss / dof / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, stderr, excluded })
}

/// Per-budget comparison of the two methods.
#[derive(Clone, Debug)]
pub struct CompareRow {
    /// Budget.
    pub n: u64,
    /// Paired seeds available at this budget.
    pub pairs: u64,
    /// Fraction of pairs the active method wins; ties count 1/2.
    pub win_rate: f64,
    /// Median active regret.
    pub median_active: f64,
    /// Median passive regret.
    pub median_passive: f64,
    /// `median_active / median_passive`.
    pub median_ratio: f64,
}

/// Output of [`compare_methods`].
#[derive(Clone, Debug)]
pub struct CompareReport {
    /// One row per budget at which both methods ran.
    pub per_n: Vec<CompareRow>,
    /// Slope fit for the active method.
    pub active: SlopeFit,
    /// Slope fit for the passive method.
    pub passive: SlopeFit,
}

/// Pair active and passive rows by (n, seed) and report per-budget win
/// rates (ties split 1/2), median ratios, and the two slope fits.
pub fn compare_methods(rows: &[ExperimentRow]) -> Result<CompareReport, HarnessError> {
    let largest_n = rows
        .iter()
        .map(|r| r.n)
        .max()
        .ok_or(HarnessError::InsufficientData("no rows"))?;
    let has = |m: Method| rows.iter().any(|r| r.method == m && r.n == largest_n);
    if !has(Method::Active) || !has(Method::Passive) {
        return Err(HarnessError::InsufficientData(
            "comparison needs both methods at the largest budget",
        ));
    }

    let mut budgets: Vec<u64> = rows.iter().map(|r| r.n).collect();
    budgets.sort_unstable();
    budgets.dedup();

    let mut per_n = Vec::new();
    for &n in &budgets {
        let mut active: std::collections::BTreeMap<u64, f64> = Default::default();
        let mut passive: std::collections::BTreeMap<u64, f64> = Default::default();
        for row in rows.iter().filter(|r| r.n == n) {
            match row.method {
                Method::Active => active.insert(row.seed, row.regret),
                Method::Passive => passive.insert(row.seed, row.regret),
            };
        }
        if active.is_empty() || passive.is_empty() {
            continue;
        }
        let mut wins = 0.0;
        let mut pairs = 0u64;
        for (seed, a) in &active {
            if let Some(p) = passive.get(seed) {
                pairs += 1;
                if a < p {
                    wins += 1.0;
                } else if a == p {
                    wins += 0.5;
                }
            }
        }
        if pairs == 0 {
            continue;
        }
        let med_a = median(&active.values().copied().collect::<Vec<_>>());
        let med_p = median(&passive.values().copied().collect::<Vec<_>>());
        per_n.push(CompareRow {
            n,
            pairs,
            win_rate: wins / pairs as f64,
            median_active: med_a,
            median_passive: med_p,
            median_ratio: med_a / med_p,
        });
    }
    Ok(CompareReport {
        per_n,
        active: fit_slope(rows, Method::Active)?,
        passive: fit_slope(rows, Method::Passive)?,
    })
}

/// Knobs for an adversarial stress run.
#[derive(Clone, Debug)]
pub struct StressConfig {
    /// Budget per run.
    pub n: u64,
    /// Required packing size (distinct plantable locations).
    pub bumps: usize,
    /// Number of seeded runs.
    pub seeds: u64,
    /// Oracle noise standard deviation.
    pub noise_sd: f64,
    /// Grid cardinality.
    pub grid_size: usize,
    /// Master seed.
    pub master_seed: u64,
    /// Lattice candidates offered to the packing construction.
    pub pack_candidates: usize,
}

impl Default for StressConfig {
    fn default() -> Self {
        StressConfig {
            n: 1024,
            bumps: 2,
            seeds: 10,
            noise_sd: 1.0,
            grid_size: 512,
            master_seed: 0,
            pack_candidates: 4096,
        }
    }
}

/// Outcome of an adversarial stress run.
#[derive(Clone, Debug)]
pub struct StressReport {
    /// The instance-hardness level the bumps are calibrated to.
    pub eps_lower: f64,
    /// Sup-norm distance between the planted objective and the base one.
    pub amplitude: f64,
    /// Bump box radius.
    pub bump_h: f64,
    /// Plantable locations found.
    pub pack_size: usize,
    /// Seeded runs executed.
    pub runs: u64,
    /// Fraction of runs with regret below `eps_lower`.
    pub below_eps_fraction: f64,
    /// Median regret across runs.
    pub median_regret: f64,
    /// Per-run regrets, in seed order.
    pub regrets: Vec<f64>,
}

/// Box radius at which a bump dips `2 eps` below `f0`: the dip is
/// `M h^alpha / 2` at the center, so matching it pins `h`.
pub fn bump_radius(f0: &FunctionSpec, eps: f64) -> f64 {
    (4.0 * eps / f0.holder_m).powf(1.0 / f0.alpha)
}

/// Locations where a `2 eps` bump of radius `h` can be planted: centers
/// of disjoint `h`-boxes packed inside the `4 eps` level set (an `h`-box
/// cannot fit inside the `eps` set itself, since `f0` may rise by the
/// full dip across it), restricted to centers lying inside the `eps` set
/// so the planted minimum lands at least `eps` below the base minimum.
/// May be empty; callers decide how many locations they need.
pub fn plantable_centers(
    f0: &FunctionSpec,
    eps: f64,
    h: f64,
    candidates: usize,
) -> Result<Vec<Vec<f64>>, HarnessError> {
    let boxes = pack_level_set(f0, 4.0 * eps, h, candidates)?;
    let f0_min = f0.min_value()?;
    Ok((0..boxes.len())
        .map(|i| boxes.get(i).to_vec())
        .filter(|c| f0.eval(c) <= f0_min + eps)
        .collect())
}

/// Plant a hardness-calibrated bump at a packing location of `f0`'s
/// level set and measure how often the active optimizer still gets within
/// the hardness level. With `eps = solve_eps_n(f0, n, lower)`, the bump
/// dips `2 eps` below `f0`; its support boxes are packed inside the
/// `4 eps` level set (an `h`-box cannot fit inside the `eps` set itself,
/// since `f0` may rise by the full dip across it), and only centers lying
/// inside the `eps` set are planted, so the planted minimum sits at least
/// `eps` below the base minimum. Before each run the planted minimizer is
/// re-verified by a brute-force scan of the bump box. Diagnostic: the
/// theory predicts the below-eps fraction cannot approach 1 as budgets
/// grow, but no assertion is made here.
pub fn adversarial_stress(
    f0: &FunctionSpec,
    cfg: &StressConfig,
) -> Result<StressReport, HarnessError> {
    let eps = solve_eps_n(f0, cfg.n, 1.0, RateVariant::Lower)?;
    let amplitude = 2.0 * eps;
    let h = bump_radius(f0, eps);
    let pack = plantable_centers(f0, eps, h, cfg.pack_candidates)?;
    if pack.len() < cfg.bumps {
        return Err(HarnessError::Core(levopt_core::Error::PackingTooSmall {
            requested: cfg.bumps,
            found: pack.len(),
        }));
    }
    let order = (f0.alpha.ceil() as usize).max(2);
    let f0_min = f0.min_value()?;

    let mut regrets = Vec::with_capacity(cfg.seeds as usize);
    let mut below = 0u64;
    for seed in 0..cfg.seeds {
        let mut pick_rng = RngStream::substream(cfg.master_seed, &[TAG_STRESS_PICK, seed]);
        let center = pack[pick_rng.index(pack.len())].clone();
        let fx = make_adversarial(f0, &center, h, order)?;
        verify_planted(&fx, f0_min, &center, h, amplitude)?;
        let (_, row) = execute_cell(
            &fx,
            Method::Active,
            cfg.n,
            seed,
            cfg.noise_sd,
            cfg.grid_size,
            cfg.master_seed,
            &OptimizerConfig::default(),
        )?;
        if row.regret < eps {
            below += 1;
        }
        regrets.push(row.regret);
    }
    Ok(StressReport {
        eps_lower: eps,
        amplitude,
        bump_h: h,
        pack_size: pack.len(),
        runs: cfg.seeds,
        below_eps_fraction: below as f64 / cfg.seeds as f64,
        median_regret: median(&regrets),
        regrets,
    })
}

/// Brute-force check that the planted minimizer sits inside the bump box
/// and that the declared minimum matches an independent lattice scan of
/// the box.
fn verify_planted(
    fx: &FunctionSpec,
    f0_min: f64,
    center: &[f64],
    h: f64,
    amplitude: f64,
) -> Result<(), HarnessError> {
    let hint = fx
        .minimizer_hint
        .clone()
        .ok_or_else(|| HarnessError::InvalidPlan("planted spec lacks a minimizer".into()))?;
    if linf_dist(&hint, center) > h + 1e-12 {
        return Err(HarnessError::InvalidPlan(
            "planted minimizer escaped the bump box".into(),
        ));
    }
    let fx_min = fx.min_value()?;
    if !(fx_min < f0_min) {
        return Err(HarnessError::InvalidPlan(
            "planted objective does not dip below the base minimum".into(),
        ));
    }
    // Independent lattice scan of the box.
    let d = center.len();
    let res = match d {
        1 => 1024,
        2 => 48,
        _ => 9,
    };
    let mut best = f64::INFINITY;
    let total = (res as u64).pow(d as u32);
    let mut z = vec![0.0; d];
    for idx in 0..total {
        let mut rem = idx;
        for (j, zj) in z.iter_mut().enumerate() {
            let step = rem % res as u64;
            rem /= res as u64;
            let lo = (center[j] - h).max(0.0);
            let hi = (center[j] + h).min(1.0);
            *zj = lo + (hi - lo) * (step as f64 + 0.5) / res as f64;
        }
        best = best.min(fx.eval(&z));
    }
    if (best - fx_min).abs() > 0.05 * amplitude + 1e-9 {
        return Err(HarnessError::InvalidPlan(format!(
            "bump-box scan found {best}, declared minimum {fx_min}"
        )));
    }
    Ok(())
}

/// Log-log slope implied by [`theoretical_rate`] for `(alpha, d, beta)`.
pub fn theoretical_slope(alpha: f64, d: usize, beta: f64) -> Result<f64, HarnessError> {
    let n1 = 1u64 << 10;
    let n2 = 1u64 << 20;
    let r1 = theoretical_rate(n1, alpha, d, beta)?;
    let r2 = theoretical_rate(n2, alpha, d, beta)?;
    Ok((r2.ln() - r1.ln()) / ((n2 as f64).ln() - (n1 as f64).ln()))
}

/// Write the two-file plot bundle: `<base>_points.csv` with one
/// aggregated point per (method, budget), and `<base>_summary.csv` with
/// one slope line per method. The active method's theoretical slope uses
/// `beta`; the passive one uses the worst-case exponent (`beta = 0`).
pub fn emit_plotdata(
    rows: &[ExperimentRow],
    alpha: f64,
    d: usize,
    beta: f64,
    path: &Path,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::InsufficientData("no rows to plot"));
    }
    let base = path.with_extension("");
    let points_path = PathBuf::from(format!("{}_points.csv", base.display()));
    let summary_path = PathBuf::from(format!("{}_summary.csv", base.display()));

    let mut methods: Vec<Method> = rows.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();

    let mut points = BufWriter::new(File::create(&points_path)?);
    writeln!(points, "log_n,log_median_regret,method")?;
    for &method in &methods {
        let mut per_n: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
        for row in rows.iter().filter(|r| r.method == method) {
            per_n.entry(row.n).or_default().push(row.regret);
        }
        for (&n, regrets) in &per_n {
            let m = median(regrets);
            if m > 0.0 {
                writeln!(points, "{},{},{}", (n as f64).ln(), m.ln(), method.as_str())?;
            }
        }
    }
    points.flush()?;

    let mut summary = BufWriter::new(File::create(&summary_path)?);
    writeln!(summary, "method,slope,stderr,theory_slope")?;
    for &method in &methods {
        let fit = fit_slope(rows, method)?;
        let theory = match method {
            Method::Active => theoretical_slope(alpha, d, beta)?,
            Method::Passive => theoretical_slope(alpha, d, 0.0)?,
        };
        writeln!(
            summary,
            "{},{},{},{}",
            method.as_str(),
            fit.slope,
            fit.stderr,
            theory
        )?;
    }
    summary.flush()?;
    Ok((points_path, summary_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic_rows(method: Method, law: impl Fn(u64) -> f64) -> Vec<ExperimentRow> {
        let mut rows = Vec::new();
        for &n in &[64u64, 128, 256, 512] {
            for seed in 0..3 {
                rows.push(ExperimentRow {
                    method,
                    n,
                    seed,
                    regret: law(n),
                    queries: n,
                    epochs: 1,
                    grid_size: 32,
                    wall_ms: 0,
                });
            }
        }
        rows
    }

    fn tiny_plan(dir: &std::path::Path, name: &str) -> SweepPlan {
        SweepPlan {
            family: FamilySpec::named("constant", 1).unwrap(),
            n_values: vec![64, 128],
            seeds: 3,
            methods: vec![Method::Active],
            noise_sd: 1.0,
            grid_size: 16,
            master_seed: 9,
            output_path: dir.join(name),
            base_config: OptimizerConfig::default(),
        }
    }

    #[test]
    fn sweep_emits_one_row_per_cell_and_reruns_identically() {
        let dir = std::env::temp_dir().join("levopt-harness-test-sweep");
        std::fs::create_dir_all(&dir).unwrap();
        let plan_a = tiny_plan(&dir, "a.csv");
        let plan_b = tiny_plan(&dir, "b.csv");
        let rows = run_sweep(&plan_a).unwrap();
        run_sweep(&plan_b).unwrap();
        assert_eq!(rows.len(), 1 * 2 * 3);
        // Constant objective: regret identically zero.
        assert!(rows.iter().all(|r| r.regret == 0.0));
        let a = std::fs::read(&plan_a.output_path).unwrap();
        let b = std::fs::read(&plan_b.output_path).unwrap();
        assert_eq!(a, b, "rerun of the same plan is not byte-identical");
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(ROW_HEADER));
        assert_eq!(text.lines().count(), 1 + 6);
    }

    #[test]
    fn plan_validation_catches_bad_inputs() {
        let dir = std::env::temp_dir();
        let mut p = tiny_plan(&dir, "unused.csv");
        p.n_values = vec![32, 64];
        assert!(matches!(run_sweep(&p), Err(HarnessError::InvalidPlan(_))));
        p.n_values = vec![128, 128];
        assert!(matches!(run_sweep(&p), Err(HarnessError::InvalidPlan(_))));
        p.n_values = vec![64, 128];
        p.seeds = 0;
        assert!(matches!(run_sweep(&p), Err(HarnessError::InvalidPlan(_))));
    }

    #[test]
    fn slope_fit_recovers_exact_power_laws() {
        let rows = synthetic_rows(Method::Active, |n| (n as f64).powf(-0.5));
        let fit = fit_slope(&rows, Method::Active).unwrap();
        assert_relative_eq!(fit.slope, -0.5, epsilon = 1e-9);

        let rows = synthetic_rows(Method::Passive, |n| 3.0 * (n as f64).powf(-0.4));
        let fit = fit_slope(&rows, Method::Passive).unwrap();
        assert_relative_eq!(fit.slope, -0.4, epsilon = 1e-9);
        assert_relative_eq!(fit.intercept, 3.0f64.ln(), epsilon = 1e-9);
        assert!(fit.stderr < 1e-9);
    }

    #[test]
    fn zero_medians_are_excluded_and_scarcity_errors() {
        let mut rows = synthetic_rows(Method::Active, |n| (n as f64).powf(-0.5));
        for row in rows.iter_mut().filter(|r| r.n == 64) {
            row.regret = 0.0;
        }
        let fit = fit_slope(&rows, Method::Active).unwrap();
        assert_eq!(fit.excluded, vec![64]);
        assert_relative_eq!(fit.slope, -0.5, epsilon = 1e-9);

        let short: Vec<ExperimentRow> =
            rows.into_iter().filter(|r| r.n <= 128).collect();
        assert!(matches!(
            fit_slope(&short, Method::Active),
            Err(HarnessError::InsufficientData(_))
        ));
    }

    #[test]
    fn identical_methods_tie_at_half() {
        let mut rows = synthetic_rows(Method::Active, |n| (n as f64).powf(-0.5));
        rows.extend(synthetic_rows(Method::Passive, |n| (n as f64).powf(-0.5)));
        let report = compare_methods(&rows).unwrap();
        assert!(!report.per_n.is_empty());
        for row in &report.per_n {
            assert_relative_eq!(row.win_rate, 0.5);
            assert_relative_eq!(row.median_ratio, 1.0);
        }
    }

    #[test]
    fn passive_only_rows_are_insufficient() {
        let rows = synthetic_rows(Method::Passive, |n| (n as f64).powf(-0.5));
        assert!(matches!(
            compare_methods(&rows),
            Err(HarnessError::InsufficientData(_))
        ));
    }

    #[test]
    fn medians_match_an_independent_oracle() {
        let values = [3.0, 1.0, 2.0, 5.0, 4.0];
        assert_relative_eq!(median(&values), 3.0);
        let even = [4.0, 1.0, 3.0, 2.0];
        assert_relative_eq!(median(&even), 2.5);
    }

    #[test]
    fn plot_bundle_has_expected_shape() {
        let dir = std::env::temp_dir().join("levopt-harness-test-plot");
        std::fs::create_dir_all(&dir).unwrap();
        let mut rows = synthetic_rows(Method::Active, |n| (n as f64).powf(-0.5));
        rows.extend(synthetic_rows(Method::Passive, |n| (n as f64).powf(-0.4)));
        let base = dir.join("bundle.csv");
        let (points, summary) = emit_plotdata(&rows, 2.0, 2, 1.0, &base).unwrap();
        let points_text = std::fs::read_to_string(points).unwrap();
        // 4 budgets x 2 methods plus a header.
        assert_eq!(points_text.lines().count(), 1 + 8);
        let summary_text = std::fs::read_to_string(summary).unwrap();
        let lines: Vec<&str> = summary_text.lines().collect();
        assert_eq!(lines.len(), 1 + 2);
        // beta = d/alpha --> active theory slope -1/2; passive -alpha/(2
        // alpha + d) = -1/3.
        let active_line: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(active_line[0], "active");
        let theory: f64 = active_line[3].parse().unwrap();
        assert_relative_eq!(theory, -0.5, epsilon = 1e-12);
        let passive_line: Vec<&str> = lines[2].split(',').collect();
        let theory_p: f64 = passive_line[3].parse().unwrap();
        assert_relative_eq!(theory_p, -1.0 / 3.0, epsilon = 1e-12);

        assert!(matches!(
            emit_plotdata(&[], 2.0, 2, 1.0, &base),
            Err(HarnessError::InsufficientData(_))
        ));
    }

    #[test]
    fn vanishing_bump_leaves_the_run_unchanged() {
        // Plant a numerically negligible bump at the base minimizer: the
        // perturbed run must match the plain run to float noise. The
        // declared constants are pinned explicitly because the planted
        // spec declares a doubled Hölder constant, which would otherwise
        // widen the confidence intervals and change the run.
        let f0 = strongly_convex_family(1, 2.0, &[0.5]).unwrap();
        let h = 1e-6; // amplitude M h^alpha / 2 ~ 2e-12
        let fx = make_adversarial(&f0, &[0.5], h, 2).unwrap();
        let pinned = OptimizerConfig {
            alpha: Some(f0.alpha),
            holder_m: Some(f0.holder_m),
            kappa: Some(f64::INFINITY),
            ..OptimizerConfig::default()
        };
        let run = |f: &FunctionSpec| {
            let (_, row) =
                execute_cell(f, Method::Active, 256, 0, 1.0, 32, 77, &pinned).unwrap();
            row
        };
        let base = run(&f0);
        let planted = run(&fx);
        assert!((base.regret - planted.regret).abs() <= 1e-9);
    }

    #[test]
    fn stress_run_reports_consistent_fields() {
        let f0 = strongly_convex_family(1, 2.0, &[0.5]).unwrap();
        let cfg = StressConfig {
            n: 512,
            bumps: 1,
            seeds: 4,
            noise_sd: 0.5,
            grid_size: 64,
            master_seed: 5,
            pack_candidates: 2048,
        };
        let report = adversarial_stress(&f0, &cfg).unwrap();
        assert!(report.pack_size >= 1);
        assert_relative_eq!(report.amplitude, 2.0 * report.eps_lower);
        assert_eq!(report.runs, 4);
        assert!((0.0..=1.0).contains(&report.below_eps_fraction));
        assert!(report.regrets.iter().all(|r| r.is_finite()));
        // Rerun is deterministic.
        let again = adversarial_stress(&f0, &cfg).unwrap();
        assert_eq!(report.regrets, again.regrets);
    }
}
