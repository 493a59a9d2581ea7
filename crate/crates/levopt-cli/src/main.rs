//! `levopt` — command-line front end for the noisy zeroth-order
//! optimization toolkit.
//!
//! Subcommands: `optimize` (active epoch-based run), `baseline` (passive
//! sample-then-fit run), `sweep` (convergence experiment over budgets and
//! seeds), `rates` (theoretical rate and hardness tables, optional
//! level-set profile CSV), and `advgen` (adversarial instance
//! construction).
//!
//! Every parameter can come from an explicit flag or from a flat
//! `key = value` config file (`--config`); flags win over the file, and
//! the file wins over built-in defaults. Exit codes: 0 on success, 2 for
//! configuration and usage errors, 3 for budget or infeasibility errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use levopt_cli::config::{ConfigError, ConfigMap};
use levopt_cli::harness::{
    bump_radius, compare_methods, emit_plotdata, execute_cell, fit_slope, plantable_centers,
    run_sweep, write_row, FamilySpec, HarnessError, Method, SweepPlan, ROW_HEADER,
};
use levopt_core::optimizer::OptimizerConfig;
use levopt_core::rng::RngStream;
use levopt_core::testbed::{
    make_adversarial, solve_eps_n, theoretical_rate, FunctionSpec, LevelSetProfile, RateVariant,
};

#[derive(Parser, Debug)]
#[command(name = "levopt", version, about = "Noisy zeroth-order global optimization toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the epoch-based active optimizer once and report the pick.
    Optimize(RunArgs),
    /// Run the passive sample-then-fit baseline once.
    Baseline(RunArgs),
    /// Run a convergence sweep over budgets, seeds, and methods.
    Sweep(RunArgs),
    /// Print theoretical-rate and hardness tables; optionally write a
    /// level-set profile CSV.
    Rates(RatesArgs),
    /// Construct an adversarial instance and describe the planted bump.
    Advgen(AdvArgs),
}

/// Flags shared by every subcommand. All optional so that a config file
/// can supply them; flags always win.
#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Flat key=value config file read before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Query budget.
    #[arg(long)]
    n: Option<u64>,
    /// Ambient dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Smoothness exponent declared to the optimizer (defaults to the
    /// family's own).
    #[arg(long)]
    alpha: Option<f64>,
    /// Hölder constant declared to the optimizer.
    #[arg(long = "M")]
    holder_m: Option<f64>,
    /// Oracle noise standard deviation.
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Evaluation grid cardinality.
    #[arg(long)]
    grid_size: Option<usize>,
    /// Benchmark family: constant, strongly-convex, two-valley, power.
    #[arg(long)]
    family: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Curvature scale (strongly-convex, two-valley).
    #[arg(long)]
    curvature: Option<f64>,
    /// Decoy-valley raise (two-valley).
    #[arg(long)]
    raise: Option<f64>,
    /// Level-set volume exponent (power family).
    #[arg(long)]
    beta: Option<f64>,
    /// Amplitude scale (power family).
    #[arg(long)]
    a0: Option<f64>,
    /// Level-set radius on which the declaration holds.
    #[arg(long)]
    kappa: Option<f64>,
    /// Per-epoch confidence level.
    #[arg(long)]
    delta: Option<f64>,
    /// Enable or disable the prescreen stage (true/false).
    #[arg(long)]
    prescreen: Option<bool>,
    /// Prescreen window radius override.
    #[arg(long)]
    prescreen_h0: Option<f64>,
    /// Epoch count override.
    #[arg(long)]
    epochs: Option<u32>,
    /// Report the last queried point instead of the CI argmin (true/false).
    #[arg(long)]
    output_last_query: Option<bool>,
    /// Passive bandwidth scale.
    #[arg(long)]
    ch: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Budgets to tabulate (comma separated).
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<u64>>,
    /// Log-power discount for the upper-variant effective budget.
    #[arg(long)]
    omega: Option<f64>,
    /// Sample count for Monte Carlo level-set volumes.
    #[arg(long)]
    mc_samples: Option<u64>,
    /// Epsilon grid for the profile CSV (comma separated).
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct AdvArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Bump box radius (defaults to the hardness-calibrated radius).
    #[arg(long)]
    h: Option<f64>,
    /// Bump center (comma separated coordinates; defaults to a packing
    /// location of the base level set).
    #[arg(long, value_delimiter = ',')]
    center: Option<Vec<f64>>,
    /// Smoothstep order of the bump profile.
    #[arg(long)]
    order: Option<usize>,
    /// Hardness level to calibrate to (defaults to the lower-variant
    /// solution at the budget).
    #[arg(long)]
    eps: Option<f64>,
}

/// Fully resolved run parameters after merging flags, config file, and
/// defaults.
struct Settings {
    seed: u64,
    n: u64,
    noise_sd: f64,
    grid_size: usize,
    family: FamilySpec,
    out: Option<PathBuf>,
    optimizer: OptimizerConfig,
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Harness(HarnessError),
    Core(levopt_core::Error),
    Io(std::io::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Harness(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}
impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Harness(e)
    }
}
impl From<levopt_core::Error> for CliError {
    fn from(e: levopt_core::Error) -> Self {
        CliError::Core(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// 2 for configuration mistakes the caller can fix by editing inputs;
/// 3 for budget and infeasibility failures.
fn core_exit_code(e: &levopt_core::Error) -> u8 {
    use levopt_core::Error::*;
    match e {
        DomainViolation { .. } | DimensionMismatch { .. } | InvalidBeta { .. }
        | InvalidParameter(_) | EmptySet => 2,
        BudgetExhausted { .. } | NonFiniteResponse | PackingTooSmall { .. } | NoMinimum
        | UnusableFit => 3,
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Harness(HarnessError::InvalidPlan(_)) => 2,
            CliError::Harness(HarnessError::Core(e)) => core_exit_code(e),
            CliError::Harness(_) => 3,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Optimize(a) => cmd_run(&a.common, Method::Active),
        Cmd::Baseline(a) => cmd_run(&a.common, Method::Passive),
        Cmd::Sweep(a) => cmd_sweep(&a.common),
        Cmd::Rates(a) => cmd_rates(&a),
        Cmd::Advgen(a) => cmd_advgen(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Merge flags over the config file over defaults. Returns the settings
/// plus the partially consumed config map so subcommands can take their
/// own keys before rejecting leftovers.
fn resolve(common: &CommonArgs) -> Result<(Settings, ConfigMap), CliError> {
    let mut cfg = match &common.config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::parse("")?,
    };

    let seed = pick(common.seed, &mut cfg, "seed")?.unwrap_or(0);
    let n = pick(common.n, &mut cfg, "n")?.unwrap_or(1024);
    let d = pick(common.d, &mut cfg, "d")?.unwrap_or(1);
    let noise_sd = pick(common.noise_sd, &mut cfg, "noise_sd")?.unwrap_or(1.0);
    let grid_size = pick(common.grid_size, &mut cfg, "grid_size")?.unwrap_or(4096);

    let family_name = common
        .family
        .clone()
        .or_else(|| cfg.take("family"))
        .unwrap_or_else(|| "strongly-convex".to_string());
    let mut family = FamilySpec::named(&family_name, d)?;
    if let Some(v) = pick(common.alpha, &mut cfg, "alpha")? {
        family.alpha = v;
    }
    if let Some(v) = pick(common.curvature, &mut cfg, "curvature")? {
        family.curvature = v;
    }
    if let Some(v) = pick(common.raise, &mut cfg, "raise")? {
        family.raise = v;
    }
    if let Some(v) = pick(common.beta, &mut cfg, "beta")? {
        family.beta = v;
    }
    if let Some(v) = pick(common.a0, &mut cfg, "a0")? {
        family.a0 = v;
    }
    if let Some(center) = cfg.take_list::<f64>("center")? {
        family.center = Some(center);
    }

    let defaults = OptimizerConfig::default();
    let optimizer = OptimizerConfig {
        n,
        grid_size,
        // `alpha` doubles as the family parameter and the declaration
        // handed to the optimizer; when unset the optimizer falls back to
        // the family's own declaration.
        alpha: common.alpha,
        holder_m: pick(common.holder_m, &mut cfg, "M")?,
        kappa: pick(common.kappa, &mut cfg, "kappa")?,
        delta: pick(common.delta, &mut cfg, "delta")?,
        prescreen: pick_bool(common.prescreen, &mut cfg, "prescreen")?
            .unwrap_or(defaults.prescreen),
        prescreen_h0: pick(common.prescreen_h0, &mut cfg, "prescreen_h0")?,
        seed,
        epochs_override: pick(common.epochs, &mut cfg, "epochs")?,
        output_last_query: pick_bool(common.output_last_query, &mut cfg, "output_last_query")?
            .unwrap_or(defaults.output_last_query),
        passive_bandwidth_scale: pick(common.ch, &mut cfg, "ch")?
            .unwrap_or(defaults.passive_bandwidth_scale),
        record_sets: false,
    };

    let out = common
        .out
        .clone()
        .or_else(|| cfg.take("out").map(PathBuf::from));

    Ok((
        Settings { seed, n, noise_sd, grid_size, family, out, optimizer },
        cfg,
    ))
}

/// Flag value if given, else the config key, else `None`.
fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    cfg: &mut ConfigMap,
    key: &str,
) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => {
            // Still consume the config key so `finish` does not flag it.
            let _ = cfg.take(key);
            Ok(Some(v))
        }
        None => cfg.take_parse(key),
    }
}

fn pick_bool(
    flag: Option<bool>,
    cfg: &mut ConfigMap,
    key: &str,
) -> Result<Option<bool>, ConfigError> {
    match flag {
        Some(v) => {
            let _ = cfg.take(key);
            Ok(Some(v))
        }
        None => cfg.take_bool(key),
    }
}

fn describe(f: &FunctionSpec, s: &Settings) -> String {
    format!(
        "objective {} | n={} grid={} noise_sd={} seed={}",
        f.name, s.n, s.grid_size, s.noise_sd, s.seed
    )
}

fn format_point(x: &[f64]) -> String {
    let coords: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", coords.join(", "))
}

/// `optimize` and `baseline`: one run, trace on stdout, optional CSV.
fn cmd_run(common: &CommonArgs, method: Method) -> Result<(), CliError> {
    let (settings, cfg) = resolve(common)?;
    cfg.finish()?;
    let f = settings.family.build()?;
    let (run, row) = execute_cell(
        &f,
        method,
        settings.n,
        0,
        settings.noise_sd,
        settings.grid_size,
        settings.seed,
        &settings.optimizer,
    )?;

    println!("{}", describe(&f, &settings));
    if method == Method::Active {
        if run.prescreen_queries > 0 {
            println!(
                "prescreen: removed {} grid points ({} queries)",
                run.prescreen_removed, run.prescreen_queries
            );
        }
        for t in &run.trace {
            println!(
                "epoch {:>3}: active {:>6}  max_eta {:.6}  min_upper {:.6}  queries {}",
                t.epoch, t.active, t.max_eta, t.min_upper, t.queries
            );
        }
    }
    println!("x_hat = {}", format_point(&run.x_hat));
    println!("f(x_hat) = {:.6}", f.eval(&run.x_hat));
    match f.regret(&run.x_hat) {
        Ok(r) => println!("regret = {r:.6}"),
        Err(_) => println!("regret = unknown (no analytic minimum)"),
    }
    println!(
        "queries {} of {} | epochs {}",
        run.queries, settings.n, run.epochs
    );

    if let Some(path) = &settings.out {
        match method {
            Method::Active => {
                let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                use std::io::Write;
                writeln!(w, "epoch,active,max_eta,min_upper,queries")?;
                for t in &run.trace {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        t.epoch, t.active, t.max_eta, t.min_upper, t.queries
                    )?;
                }
                w.flush()?;
            }
            Method::Passive => {
                let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                use std::io::Write;
                writeln!(w, "{ROW_HEADER}")?;
                write_row(&mut w, &row)?;
                w.flush()?;
            }
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// `sweep`: full convergence experiment; writes the row CSV and a plot
/// bundle next to it, prints slope fits and the paired comparison.
fn cmd_sweep(common: &CommonArgs) -> Result<(), CliError> {
    let (settings, mut cfg) = resolve(common)?;

    let n_values = cfg
        .take_list::<u64>("n_values")?
        .ok_or_else(|| CliError::Usage("sweep needs n_values (config key, comma separated)".into()))?;
    let seeds = cfg.take_parse::<u64>("seeds")?.unwrap_or(10);
    let methods = match cfg.take("methods") {
        Some(raw) => {
            let mut ms = Vec::new();
            for tok in raw.split(',') {
                let m = Method::parse(tok).ok_or_else(|| {
                    CliError::Usage(format!("unknown method `{}` in methods", tok.trim()))
                })?;
                ms.push(m);
            }
            ms
        }
        None => vec![Method::Active, Method::Passive],
    };
    cfg.finish()?;

    let out = settings
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("sweep needs an output path (--out or out=...)".into()))?;

    let plan = SweepPlan {
        family: settings.family.clone(),
        n_values,
        seeds,
        methods,
        noise_sd: settings.noise_sd,
        grid_size: settings.grid_size,
        master_seed: settings.seed,
        output_path: out.clone(),
        base_config: settings.optimizer.clone(),
    };
    let rows = run_sweep(&plan)?;
    println!("wrote {} rows to {}", rows.len(), out.display());

    let f = settings.family.build()?;
    let beta = f.beta_hint.unwrap_or(0.0);
    match emit_plotdata(&rows, f.alpha, f.dim, beta, &out) {
        Ok((points, summary)) => {
            println!("wrote {} and {}", points.display(), summary.display());
        }
        Err(HarnessError::InsufficientData(why)) => {
            println!("plot bundle skipped: {why}");
        }
        Err(e) => return Err(e.into()),
    }

    for &method in &plan.methods {
        match fit_slope(&rows, method) {
            Ok(fit) => println!(
                "{}: slope {:.4} (stderr {:.4})",
                method.as_str(),
                fit.slope,
                fit.stderr
            ),
            Err(HarnessError::InsufficientData(why)) => {
                println!("{}: slope unavailable ({why})", method.as_str())
            }
            Err(e) => return Err(e.into()),
        }
    }
    if plan.methods.contains(&Method::Active) && plan.methods.contains(&Method::Passive) {
        match compare_methods(&rows) {
            Ok(report) => {
                for row in &report.per_n {
                    println!(
                        "n={}: active wins {:.2} of {} pairs, median ratio {:.4}",
                        row.n, row.win_rate, row.pairs, row.median_ratio
                    );
                }
            }
            Err(HarnessError::InsufficientData(why)) => {
                println!("comparison skipped: {why}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// `rates`: theoretical rate and hardness tables; optional profile CSV.
fn cmd_rates(args: &RatesArgs) -> Result<(), CliError> {
    let (settings, cfg) = resolve(&args.common)?;
    cfg.finish()?;
    let f = settings.family.build()?;
    let omega = args.omega.unwrap_or(1.0);
    let n_list = args
        .n_list
        .clone()
        .unwrap_or_else(|| vec![512, 1024, 2048, 4096, 8192, 16384]);
    let beta = f.beta_hint.unwrap_or(0.0);

    println!(
        "objective {} | alpha={} d={} beta_hint={} omega={}",
        f.name,
        f.alpha,
        f.dim,
        f.beta_hint.map_or("none".to_string(), |b| b.to_string()),
        omega
    );
    println!(
        "{:>10} {:>14} {:>14} {:>14}",
        "n", "rate", "eps_lower", "eps_upper"
    );
    for &n in &n_list {
        let rate = theoretical_rate(n, f.alpha, f.dim, beta)?;
        let lo = solve_eps_n(&f, n, omega, RateVariant::Lower)?;
        let hi = solve_eps_n(&f, n, omega, RateVariant::Upper)?;
        println!("{n:>10} {rate:>14.6e} {lo:>14.6e} {hi:>14.6e}");
    }

    if let Some(path) = &settings.out {
        let eps_list = args.eps_list.clone().unwrap_or_else(|| {
            // 16 log-spaced levels in [1e-3, 1].
            (0..16)
                .map(|i| 1e-3 * 1000f64.powf(i as f64 / 15.0))
                .collect()
        });
        let profile = match LevelSetProfile::analytic(&f, &eps_list) {
            Ok(p) => p,
            Err(_) => {
                let samples = args.mc_samples.unwrap_or(200_000);
                let mut rng = RngStream::substream(settings.seed, &[0x7f11e]);
                LevelSetProfile::monte_carlo(&f, &eps_list, samples, &mut rng)?
            }
        };
        write_profile(path, &profile)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Level-set profile CSV in the fixed (eps, volume, method, samples)
/// column order.
fn write_profile(path: &Path, profile: &LevelSetProfile) -> Result<(), CliError> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "eps,volume,method,samples")?;
    for (eps, vol) in profile.epsilons.iter().zip(&profile.volumes) {
        writeln!(
            w,
            "{},{},{},{}",
            eps,
            vol,
            profile.method.as_str(),
            profile.mc_samples
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `advgen`: build an adversarial instance and describe the planted bump.
fn cmd_advgen(args: &AdvArgs) -> Result<(), CliError> {
    let (settings, cfg) = resolve(&args.common)?;
    cfg.finish()?;
    let f0 = settings.family.build()?;
    let eps = match args.eps {
        Some(e) => e,
        None => solve_eps_n(&f0, settings.n, 1.0, RateVariant::Lower)?,
    };
    let h = match args.h {
        Some(h) => h,
        None => bump_radius(&f0, eps),
    };
    let order = args
        .order
        .unwrap_or_else(|| (f0.alpha.ceil() as usize).max(2));
    let center = match &args.center {
        Some(c) => c.clone(),
        None => {
            let pack = plantable_centers(&f0, eps, h, 4096)?;
            pack.into_iter().next().ok_or(CliError::Core(
                levopt_core::Error::PackingTooSmall { requested: 1, found: 0 },
            ))?
        }
    };
    let fx = make_adversarial(&f0, &center, h, order)?;
    let amplitude = f0.holder_m * h.powf(f0.alpha) / 2.0;

    println!("base {}", f0.name);
    println!(
        "hardness eps = {eps:.6e} (lower variant at n={}), bump radius h = {h:.6}",
        settings.n
    );
    println!(
        "bump: center {}, amplitude {:.6e}, smoothstep order {}",
        format_point(&center),
        amplitude,
        order
    );
    println!(
        "planted: {} | alpha={} M={} kappa={}",
        fx.name, fx.alpha, fx.holder_m, fx.kappa
    );
    match (fx.analytic_min, &fx.minimizer_hint) {
        (Some(min), Some(arg)) => {
            println!("planted minimum {:.6e} at {}", min, format_point(arg))
        }
        _ => println!("planted minimum not available in closed form"),
    }

    if let Some(path) = &settings.out {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(w, "field,value")?;
        writeln!(w, "base,{}", f0.name)?;
        writeln!(w, "dim,{}", f0.dim)?;
        writeln!(w, "eps,{eps}")?;
        writeln!(w, "h,{h}")?;
        writeln!(w, "amplitude,{amplitude}")?;
        writeln!(w, "order,{order}")?;
        writeln!(w, "center,{}", join(&center))?;
        writeln!(w, "alpha,{}", fx.alpha)?;
        writeln!(w, "M,{}", fx.holder_m)?;
        writeln!(w, "kappa,{}", fx.kappa)?;
        if let Some(min) = fx.analytic_min {
            writeln!(w, "planted_min,{min}")?;
        }
        if let Some(arg) = &fx.minimizer_hint {
            writeln!(w, "planted_argmin,{}", join(arg))?;
        }
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
