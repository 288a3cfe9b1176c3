//! `vi-solve`: runs the benchmark experiments, single solves and the
//! invariant suites from the command line.
//!
//! ```text
//! vi-solve bench --experiment exp-operator --n 1000 --eps 1e-2 --seed 42 --out ./r
//! vi-solve bench --config manifests/desk.conf --jobs 4 --out ./r --format csv,json,svg
//! vi-solve solve --experiment nonsmooth-saddle --p 100 --q 50 --eps 0.125
//! vi-solve check
//! vi-solve validate manifests/desk.conf
//! ```
//!
//! Exit status: 0 when every solve converged, 2 when a row was flagged (or a
//! check failed), 1 on usage and I/O errors. The seed is taken from
//! `--seed`, then the manifest, then `VI_SOLVE_SEED`, then 0.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use vi_bench::{run_experiment, ExperimentConfig, ExperimentKind, Instance, ResultRow};
use vi_core::MInit;

pub mod checks;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, Result};

use config::{Block, Issue};
use output::{Metric, Summary};

pub const SEED_ENV: &str = "VI_SOLVE_SEED";

#[derive(Debug, Parser)]
#[command(name = "vi-solve", version, about = "Adaptive mirror-prox solvers for variational inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run benchmark experiments and write CSV/JSON/SVG results.
    Bench(BenchArgs),
    /// Solve one generated instance and print its certificate.
    Solve(SolveArgs),
    /// Run the invariant suites.
    Check(CheckArgs),
    /// Print a manifest with every default filled in.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone)]
struct Experiments(Vec<ExperimentKind>);

fn parse_experiments(s: &str) -> std::result::Result<Experiments, String> {
    if s == "all" {
        return Ok(Experiments(ExperimentKind::ALL.to_vec()));
    }
    s.split(',').map(|k| k.trim().parse()).collect::<std::result::Result<_, _>>().map(Experiments)
}

fn parse_m_init(s: &str) -> std::result::Result<MInit, String> {
    match s {
        "quotient" => Ok(MInit::DifferenceQuotient),
        _ => s
            .parse()
            .map(MInit::Fixed)
            .map_err(|_| format!("expected `quotient` or a number, got {s:?}")),
    }
}

/// Values shared by `bench` and `solve`; each one overrides the manifest.
#[derive(Debug, Args)]
struct ProblemFlags {
    /// Target accuracies, comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    eps: Option<Vec<f64>>,
    /// Base seed [fallback: VI_SOLVE_SEED, then 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Line-search factor a > 1.
    #[arg(long, allow_negative_numbers = true)]
    search_factor: Option<f64>,
    /// Initial M: `quotient` or a positive number.
    #[arg(long, value_parser = parse_m_init, allow_negative_numbers = true)]
    m_init: Option<MInit>,
    /// Dimension n (exp-operator, fermat-torricelli).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Dimension p of u (nonsmooth-saddle).
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    /// Dimension q of v (nonsmooth-saddle).
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<usize>>,
    /// Number of constraints m (fermat-torricelli).
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Number of anchor points N (fermat-torricelli).
    #[arg(long = "N", value_name = "N", value_delimiter = ',')]
    big_n: Option<Vec<usize>>,
    /// Multiplier-ball radius (fermat-torricelli).
    #[arg(long, allow_negative_numbers = true)]
    lambda_radius: Option<f64>,
    /// Iterations per solve before the row is flagged.
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl ProblemFlags {
    fn block(&self) -> Block {
        Block {
            experiment: None,
            n: self.n.clone(),
            p: self.p.clone(),
            q: self.q.clone(),
            m: self.m.clone(),
            big_n: self.big_n.clone(),
            eps: self.eps.clone(),
            seed: self.seed,
            trials: None,
            search_factor: self.search_factor,
            m_init: self.m_init,
            lambda_radius: self.lambda_radius,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Timing {
    /// Record wall-clock time per solve.
    Measured,
    /// Write zero times, so that data files depend only on the manifest.
    Omit,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Manifest file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiments to run: a comma-separated list or `all`.
    #[arg(long, value_parser = parse_experiments)]
    experiment: Option<Experiments>,
    #[command(flatten)]
    problem: ProblemFlags,
    /// Independent instances per (dimension, ε).
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Output formats, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json,svg")]
    format: Vec<Format>,
    #[arg(long, value_enum, default_value_t = Timing::Measured)]
    timing: Timing,
    /// Print per-cell means; repeat for per-row lines.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    experiment: ExperimentKind,
    #[command(flatten)]
    problem: ProblemFlags,
    /// Which trial's instance to generate.
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Samples per sampled inequality.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    path: PathBuf,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}: expected an unsigned integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn config_error(issues: Vec<Issue>) -> CliError {
    CliError::Config(issues.iter().map(|i| i.to_string()).collect())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn dims_flags_used(block: &Block) -> Vec<&'static str> {
    [
        ("n", block.n.is_some()),
        ("p", block.p.is_some()),
        ("q", block.q.is_some()),
        ("m", block.m.is_some()),
        ("N", block.big_n.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, set)| set.then_some(k))
    .collect()
}

fn check_dims_flags(flags: &Block, kinds: &[ExperimentKind]) -> Result<()> {
    for key in dims_flags_used(flags) {
        if !kinds.iter().any(|k| config::allowed_dims(*k).contains(&key)) {
            let names: Vec<&str> = kinds.iter().map(|k| k.flag_name()).collect();
            return Err(CliError::Usage(format!("--{key} is not a dimension of {}", names.join(", "))));
        }
    }
    Ok(())
}

/// Resolves the experiment configurations of a `bench` invocation.
fn bench_configs(args: &BenchArgs) -> Result<Vec<ExperimentConfig>> {
    let mut overrides = args.problem.block();
    overrides.trials = args.trials;
    let (shared, mut blocks) = match &args.config {
        Some(path) => config::parse_blocks(&read_text(path)?).map_err(config_error)?,
        None => {
            let kinds = args
                .experiment
                .as_ref()
                .ok_or_else(|| CliError::Usage("bench needs --experiment or --config".into()))?;
            let kinds = &kinds.0;
            let blocks = kinds
                .iter()
                .map(|&k| Block {
                    experiment: Some(k),
                    ..Block::default()
                })
                .collect();
            (Block::default(), blocks)
        }
    };
    if let Some(Experiments(kinds)) = &args.experiment {
        blocks.retain(|b| b.experiment.is_some_and(|k| kinds.contains(&k)));
        if blocks.is_empty() {
            return Err(CliError::Usage("the manifest has none of the selected experiments".into()));
        }
    }
    let kinds: Vec<ExperimentKind> = blocks.iter().filter_map(|b| b.experiment).collect();
    check_dims_flags(&overrides, &kinds)?;
    config::resolve_all(&shared, blocks, &overrides, env_seed()?).map_err(config_error)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    if args.format.is_empty() {
        return Err(CliError::Usage("--format needs at least one of csv, json, svg".into()));
    }
    if args.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let configs = bench_configs(args)?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;

    let mut summary = Summary { experiments: Vec::new() };
    let mut flagged = 0;
    for cfg in &configs {
        let mut rows = pool.install(|| run_experiment(cfg))?;
        if args.timing == Timing::Omit {
            rows.iter_mut().for_each(|r| r.wall_time_s = 0.0);
        }
        let bad = rows.iter().filter(|r| !r.converged).count();
        flagged += bad;
        let id = cfg.experiment.id();
        if args.format.contains(&Format::Csv) {
            let mut buf = Vec::new();
            output::write_csv(&rows, &mut buf)?;
            write_file(&args.out.join(format!("{id}.csv")), &buf)?;
        }
        let s = output::summarize(cfg, &rows);
        if args.format.contains(&Format::Svg) {
            for metric in [Metric::Iterations, Metric::WallTime] {
                let path = args.out.join(format!("{id}_{}.svg", metric.file_suffix()));
                write_file(&path, output::svg_plot(&s, metric).as_bytes())?;
            }
        }
        report(out, cfg, &rows, &s, bad, args.verbose)?;
        summary.experiments.push(s);
    }
    if args.format.contains(&Format::Json) {
        write_file(&args.out.join("summary.json"), output::summary_json(&summary)?.as_bytes())?;
    }
    Ok(if flagged > 0 { 2 } else { 0 })
}

fn report(
    out: &mut dyn Write,
    cfg: &ExperimentConfig,
    rows: &[ResultRow],
    s: &output::ExperimentSummary,
    flagged: usize,
    verbose: u8,
) -> Result<()> {
    writeln!(out, "{}: {} rows, {flagged} flagged", cfg.experiment.id(), rows.len())?;
    if verbose >= 1 {
        for c in &s.cells {
            writeln!(
                out,
                "  {}x{}x{} eps={:e} iterations={:.1} calls={:.1} converged={}/{}",
                c.dim_a, c.dim_b, c.dim_c, c.eps, c.mean_iterations, c.mean_oracle_calls, c.converged, c.trials
            )?;
        }
        for f in &s.fits {
            let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
            writeln!(
                out,
                "  {}x{}x{} eps-exponent={} log-fit R²={}",
                f.dim_a,
                f.dim_b,
                f.dim_c,
                show(f.epsilon_exponent),
                show(f.log_fit_r_squared)
            )?;
        }
    }
    if verbose >= 2 {
        for r in rows {
            writeln!(out, "  {r:?}")?;
        }
    }
    Ok(())
}

fn solve_one(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let flags = args.problem.block();
    check_dims_flags(&flags, &[args.experiment])?;
    let block = Block {
        experiment: Some(args.experiment),
        ..Block::default()
    };
    let cfg = config::resolve_all(&Block::default(), vec![block], &flags, env_seed()?)
        .map_err(config_error)?
        .remove(0);
    let [dims] = cfg.dims[..] else {
        return Err(CliError::Usage("solve takes a single size per dimension".into()));
    };
    let eps = match &args.problem.eps {
        Some(e) if e.len() == 1 => e[0],
        Some(_) => return Err(CliError::Usage("solve takes a single --eps".into())),
        None => cfg.eps.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let seed = cfg.instance_seed(dims, args.trial);
    let inst = Instance::build(cfg.experiment, dims, seed, cfg.lambda_radius)?;
    let sol = inst.solve(eps, &cfg.solver_options(inst.norm()))?;
    let json = serde_json::json!({
        "experiment": cfg.experiment.id(),
        "dims": [dims.a, dims.b, dims.c],
        "eps": eps,
        "trial": args.trial,
        "seed": seed,
        "converged": sol.converged,
        "iterations": sol.iterations(),
        "oracle_calls": sol.oracle_calls() + sol.init_oracle_calls,
        "gap": sol.certificate.gap_value,
        "inverse_sum": sol.certificate.inverse_sum,
        "m_init": sol.m_init,
        "max_m": sol.trace.max_m(),
        "average": sol.certificate.average.as_slice(),
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&json)?)?;
    Ok(if sol.converged { 0 } else { 2 })
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let outcomes = checks::run_all(args.samples)?;
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 2 })
}

fn validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<i32> {
    let text = read_text(&args.path)?;
    let cfgs = config::load(&text, &Block::default(), None).map_err(config_error)?;
    write!(out, "{}", config::render(&cfgs))?;
    Ok(0)
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the exit status.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Bench(a) => bench(a, out),
        Command::Solve(a) => solve_one(a, out),
        Command::Check(a) => check(a, out),
        Command::Validate(a) => validate(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
