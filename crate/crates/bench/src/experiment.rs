//! Experiment configurations and the runner.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use vi_core::saddle::Lagrangian;
use vi_core::{
    exact_oracle, make_vi_operator, solve, FeasibleSet, HolderSpec, InexactOracle, MInit, Norm,
    Point, ProxSetup, SaddleOperator, Solution, SolverOptions, StoppingRule, ToleranceBudget,
};

use crate::error::{Error, Result};
use crate::problems::{
    exp_operator_lipschitz, fts_start, gen_exp_operator, gen_fts, gen_nonsmooth_saddle, ExpProblem,
    NonsmoothSaddle, DEFAULT_LAMBDA_RADIUS,
};
use crate::seed::stream_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    ExpOperator,
    NonsmoothSaddle,
    FermatTorricelli,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] = [
        ExperimentKind::ExpOperator,
        ExperimentKind::NonsmoothSaddle,
        ExperimentKind::FermatTorricelli,
    ];

    /// Identifier used in result files.
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentKind::ExpOperator => "exp_operator",
            ExperimentKind::NonsmoothSaddle => "nonsmooth_saddle",
            ExperimentKind::FermatTorricelli => "fermat_torricelli",
        }
    }

    /// Spelling used on the command line.
    pub fn flag_name(&self) -> &'static str {
        match self {
            ExperimentKind::ExpOperator => "exp-operator",
            ExperimentKind::NonsmoothSaddle => "nonsmooth-saddle",
            ExperimentKind::FermatTorricelli => "fermat-torricelli",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            ExperimentKind::ExpOperator => 1,
            ExperimentKind::NonsmoothSaddle => 2,
            ExperimentKind::FermatTorricelli => 3,
        }
    }

    /// Desk-scale dimensions.
    pub fn default_dims(&self) -> Vec<Dims> {
        match self {
            ExperimentKind::ExpOperator => vec![Dims::exp(1000), Dims::exp(10_000)],
            ExperimentKind::NonsmoothSaddle => vec![Dims::saddle(100, 50)],
            ExperimentKind::FermatTorricelli => vec![Dims::fts(50, 10, 20)],
        }
    }

    /// Accuracy grids. The Fermat–Torricelli grid stops at `1/8`: below it
    /// the certified-gap rule needs millions of iterations at desk scale.
    pub fn default_eps(&self) -> Vec<f64> {
        match self {
            ExperimentKind::ExpOperator => (1..=4)
                .flat_map(|i| [10f64.powi(-i), 5.0 * 10f64.powi(-i - 1)])
                .collect(),
            ExperimentKind::NonsmoothSaddle => [0, 1, 2, 3, 5, 7, 9, 11, 13, 15, 18, 23, 31]
                .iter()
                .map(|i| 1.0 / (2 * i + 2) as f64)
                .collect(),
            ExperimentKind::FermatTorricelli => (1..=3).map(|i| 0.5f64.powi(i)).collect(),
        }
    }

    pub fn default_trials(&self) -> usize {
        match self {
            ExperimentKind::ExpOperator => 1,
            _ => 10,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| s == k.id() || s == k.flag_name())
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

/// Problem sizes: `(n, 0, 0)`, `(p, q, 0)` or `(n, m, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dims {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Dims {
    pub fn exp(n: usize) -> Self {
        Self { a: n, b: 0, c: 0 }
    }

    pub fn saddle(p: usize, q: usize) -> Self {
        Self { a: p, b: q, c: 0 }
    }

    pub fn fts(n: usize, m: usize, big_n: usize) -> Self {
        Self { a: n, b: m, c: big_n }
    }

    fn violations(&self, kind: ExperimentKind) -> Vec<String> {
        let mut v = Vec::new();
        match kind {
            ExperimentKind::ExpOperator => {
                if self.a < 2 {
                    v.push(format!("n: must be at least 2, got {}", self.a));
                }
                if self.b != 0 || self.c != 0 {
                    v.push("dims: exp_operator takes a single dimension n".into());
                }
            }
            ExperimentKind::NonsmoothSaddle => {
                if self.a == 0 {
                    v.push("p: must be positive".into());
                }
                if self.b == 0 {
                    v.push("q: must be positive".into());
                }
                if self.c != 0 {
                    v.push("dims: nonsmooth_saddle takes two dimensions p, q".into());
                }
            }
            ExperimentKind::FermatTorricelli => {
                for (name, d) in [("n", self.a), ("m", self.b), ("N", self.c)] {
                    if d == 0 {
                        v.push(format!("{name}: must be positive"));
                    }
                }
            }
        }
        v
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dims: Vec<Dims>,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub trials: usize,
    pub search_factor: f64,
    pub m_init: MInit,
    /// Multiplier-ball radius for the Fermat–Torricelli Lagrangian.
    pub lambda_radius: f64,
    /// Outer iterations per solve before the row is flagged.
    pub max_iterations: usize,
}

impl ExperimentConfig {
    /// Desk-scale defaults for `experiment`.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            dims: experiment.default_dims(),
            eps: experiment.default_eps(),
            seed: 0,
            trials: experiment.default_trials(),
            search_factor: 2.0,
            m_init: MInit::DifferenceQuotient,
            lambda_radius: DEFAULT_LAMBDA_RADIUS,
            max_iterations: 5_000_000,
        }
    }

    /// Every violated constraint, as `field: reason`.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.dims.is_empty() {
            v.push("dims: at least one size is required".into());
        }
        for d in &self.dims {
            v.extend(d.violations(self.experiment));
        }
        if self.eps.is_empty() {
            v.push("eps: at least one accuracy is required".into());
        }
        for e in &self.eps {
            if !(*e > 0.0 && e.is_finite()) {
                v.push(format!("eps: must be positive and finite, got {e}"));
            }
        }
        if self.trials == 0 {
            v.push("trials: must be at least 1".into());
        }
        if !(self.search_factor > 1.0 && self.search_factor.is_finite()) {
            v.push(format!("search_factor: must exceed 1, got {}", self.search_factor));
        }
        if let MInit::Fixed(m) = self.m_init {
            if !(m > 0.0 && m.is_finite()) {
                v.push(format!("m_init: must be positive, got {m}"));
            }
        }
        if !(self.lambda_radius > 0.0 && self.lambda_radius.is_finite()) {
            v.push(format!("lambda_radius: must be positive, got {}", self.lambda_radius));
        }
        if self.max_iterations == 0 {
            v.push("max_iterations: must be positive".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Seed of the instance for `(dims, trial)`; shared by all accuracies.
    pub fn instance_seed(&self, dims: Dims, trial: usize) -> u64 {
        stream_seed(
            self.seed,
            &[self.experiment.tag(), dims.a as u64, dims.b as u64, dims.c as u64, trial as u64],
        )
    }

    pub fn solver_options(&self, norm: Norm) -> SolverOptions {
        SolverOptions {
            norm,
            search_factor: self.search_factor,
            m_init: self.m_init,
            max_iterations: self.max_iterations,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub dims: Dims,
    pub eps: f64,
    pub trial: usize,
    /// Seed of the instance stream.
    pub seed: u64,
    pub iterations: usize,
    /// Including the evaluations spent on the initial `M`.
    pub oracle_calls: usize,
    /// The accuracy certificate of the averaged point; NaN after divergence.
    pub final_gap: f64,
    pub converged: bool,
    pub wall_time_s: f64,
}

/// A generated problem ready to be solved.
pub enum Instance {
    Exp(ExpProblem),
    Saddle(SaddleOperator<NonsmoothSaddle>),
    Fts { operator: SaddleOperator<Lagrangian>, start: Point },
}

impl Instance {
    pub fn build(kind: ExperimentKind, dims: Dims, seed: u64, lambda_radius: f64) -> Result<Self> {
        let v = dims.violations(kind);
        if !v.is_empty() {
            return Err(Error::Invalid(v));
        }
        Ok(match kind {
            ExperimentKind::ExpOperator => Instance::Exp(gen_exp_operator(dims.a)?),
            ExperimentKind::NonsmoothSaddle => {
                Instance::Saddle(make_vi_operator(gen_nonsmooth_saddle(dims.a, dims.b, seed)?))
            }
            ExperimentKind::FermatTorricelli => Instance::Fts {
                operator: make_vi_operator(gen_fts(dims.a, dims.b, dims.c, seed, lambda_radius)?),
                start: fts_start(dims.a, dims.b),
            },
        })
    }

    pub fn oracle(&self) -> Box<dyn InexactOracle + '_> {
        match self {
            Instance::Exp(pb) => Box::new(exact_oracle(&pb.operator)),
            Instance::Saddle(op) => Box::new(exact_oracle(op)),
            Instance::Fts { operator, .. } => Box::new(exact_oracle(operator)),
        }
    }

    pub fn set(&self) -> FeasibleSet {
        match self {
            Instance::Exp(pb) => pb.set.clone(),
            Instance::Saddle(op) => op.problem().set(),
            Instance::Fts { operator, .. } => operator.problem().set(),
        }
    }

    pub fn setup(&self) -> ProxSetup {
        match self {
            Instance::Exp(pb) => ProxSetup::euclidean_at(pb.start.clone()),
            Instance::Saddle(op) => ProxSetup::euclidean_at(Point::zeros(op.problem().dim())),
            Instance::Fts { start, .. } => ProxSetup::euclidean_at(start.clone()),
        }
    }

    pub fn norm(&self) -> Norm {
        match self {
            Instance::Exp(_) => Norm::Euclidean,
            Instance::Saddle(op) => op.problem().norm(),
            Instance::Fts { operator, .. } => operator.problem().norm(),
        }
    }

    /// Known Hölder exponent and constant of the operator on the set, in
    /// [`Instance::norm`].
    pub fn holder(&self) -> Option<HolderSpec> {
        match self {
            Instance::Exp(_) => HolderSpec::lipschitz(exp_operator_lipschitz()).ok(),
            Instance::Saddle(op) => {
                let p = op.problem();
                let blocks = p.function.block_constants().ok()?;
                HolderSpec::new(0.0, vi_core::holder_constant_of_blocks(blocks, p.norm_mode)).ok()
            }
            Instance::Fts { .. } => None,
        }
    }

    /// `max_u V[z₀](u)` bound used by the certified-gap rule.
    pub fn radius(&self) -> Result<f64> {
        Ok(self.set().bregman_radius_bound(&self.setup())?)
    }

    /// Solves to accuracy `eps` under the certified-gap rule.
    pub fn solve(&self, eps: f64, options: &SolverOptions) -> Result<Solution> {
        let set = self.set();
        let setup = self.setup();
        let radius = set.bregman_radius_bound(&setup)?;
        let budget = ToleranceBudget::new(eps)?;
        let oracle = self.oracle();
        Ok(solve(&oracle, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), options)?)
    }
}

fn run_cell(cfg: &ExperimentConfig, dims: Dims, trial: usize) -> Result<Vec<ResultRow>> {
    let seed = cfg.instance_seed(dims, trial);
    let instance = Instance::build(cfg.experiment, dims, seed, cfg.lambda_radius)?;
    let options = cfg.solver_options(instance.norm());
    let mut rows = Vec::with_capacity(cfg.eps.len());
    for &eps in &cfg.eps {
        let start = Instant::now();
        let outcome = instance.solve(eps, &options);
        let wall_time_s = start.elapsed().as_secs_f64();
        let row = match outcome {
            Ok(sol) => ResultRow {
                experiment: cfg.experiment,
                dims,
                eps,
                trial,
                seed,
                iterations: sol.iterations(),
                oracle_calls: sol.oracle_calls() + sol.init_oracle_calls,
                final_gap: sol.certificate.gap_value,
                converged: sol.converged,
                wall_time_s,
            },
            Err(Error::Solver(vi_core::Error::Diverged { iteration, .. })) => ResultRow {
                experiment: cfg.experiment,
                dims,
                eps,
                trial,
                seed,
                iterations: iteration,
                oracle_calls: 0,
                final_gap: f64::NAN,
                converged: false,
                wall_time_s,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Runs every `(dims, eps, trial)` cell on the current rayon pool. Rows are
/// ordered by dimension, then accuracy, then trial, following the order of
/// the configuration lists.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.dims.len())
        .flat_map(|d| (0..cfg.trials).map(move |t| (d, t)))
        .collect();
    let blocks = cells
        .par_iter()
        .map(|&(d, t)| run_cell(cfg, cfg.dims[d], t))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(blocks.len() * cfg.eps.len());
    for cells in blocks.chunks(cfg.trials.max(1)) {
        for e in 0..cfg.eps.len() {
            rows.extend(cells.iter().map(|trial| trial[e].clone()));
        }
    }
    Ok(rows)
}
