//! Invariant suites run by `vi-solve check`.

use std::fmt;

use rand::Rng;
use vi_bench::seed::stream;
use vi_bench::{Dims, ExperimentConfig, ExperimentKind, Instance};
use vi_core::linalg::{dot, norm2, sub};
use vi_core::oracle::{check_conformance, holder_young_bound};
use vi_core::{
    delta_l_oracle, duality_gap_bound, exact_oracle, holder_l, inner_iteration_bound, noisy_oracle, restart_solve,
    solve, DeltaLPair, FeasibleSet, FnOperator, HolderSpec, InexactOracle, Norm, Point, ProxSetup, SolverOptions,
    StoppingRule, ToleranceBudget,
};

use crate::error::Result;

/// Numerical slack on inequalities that hold exactly in real arithmetic.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
pub const YOUNG_SLACK: f64 = 1e-12;
pub const CONFORMANCE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// One exact-prox solve of the test matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRun {
    pub problem: String,
    pub eps: f64,
    pub radius: f64,
    pub converged: bool,
    pub gap: f64,
    pub inverse_sum: f64,
    pub iterations: usize,
    /// Line-search calls, without the ones spent on `M_init`.
    pub oracle_calls: usize,
    pub m_init: f64,
    pub max_m: f64,
    pub holder: Option<HolderSpec>,
}

fn record(problem: String, eps: f64, radius: f64, sol: &vi_core::Solution, holder: Option<HolderSpec>) -> MatrixRun {
    MatrixRun {
        problem,
        eps,
        radius,
        converged: sol.converged,
        gap: sol.certificate.gap_value,
        inverse_sum: sol.certificate.inverse_sum,
        iterations: sol.iterations(),
        oracle_calls: sol.oracle_calls(),
        m_init: sol.m_init,
        max_m: sol.trace.max_m().unwrap_or(sol.m_init),
        holder,
    }
}

fn instance_runs(kind: ExperimentKind, dims: Dims, trials: usize, eps: &[f64]) -> Result<Vec<MatrixRun>> {
    let cfg = ExperimentConfig::new(kind);
    let mut out = Vec::new();
    for trial in 0..trials {
        let inst = Instance::build(kind, dims, cfg.instance_seed(dims, trial), cfg.lambda_radius)?;
        let options = cfg.solver_options(inst.norm());
        let radius = inst.radius()?;
        for &e in eps {
            let sol = inst.solve(e, &options)?;
            out.push(record(format!("{kind} {dims} trial {trial}"), e, radius, &sol, inst.holder()));
        }
    }
    Ok(out)
}

fn fixture_run<O: InexactOracle>(
    name: &str,
    oracle: &O,
    setup: ProxSetup,
    set: &FeasibleSet,
    holder: HolderSpec,
    eps: &[f64],
) -> Result<Vec<MatrixRun>> {
    let radius = set.bregman_radius_bound(&setup)?;
    let mut out = Vec::new();
    for &e in eps {
        let budget = ToleranceBudget::new(e)?;
        let sol = solve(oracle, &setup, set, &budget, StoppingRule::CertifiedGap(radius), &SolverOptions::default())?;
        out.push(record(name.to_string(), e, radius, &sol, Some(holder)));
    }
    Ok(out)
}

/// Solves the test matrix: the benchmark generators at small scale plus two
/// closed-form fixtures, all with exact prox-mappings and `δ_u = 0`.
pub fn solve_matrix() -> Result<Vec<MatrixRun>> {
    let mut runs = instance_runs(ExperimentKind::ExpOperator, Dims::exp(1000), 1, &[1e-1, 1e-2, 1e-3, 1e-4])?;
    runs.extend(instance_runs(
        ExperimentKind::NonsmoothSaddle,
        Dims::saddle(100, 50),
        3,
        &[0.5, 0.25, 0.125],
    )?);
    runs.extend(instance_runs(ExperimentKind::FermatTorricelli, Dims::fts(10, 3, 5), 2, &[0.5])?);

    let c = [0.3, -0.2, 0.1, 0.4];
    let shifted = exact_oracle(FnOperator::new(4, move |x: &[f64]| sub(x, &c)));
    runs.extend(fixture_run(
        "shifted identity",
        &shifted,
        ProxSetup::euclidean_at(Point::new(vec![-0.5, 0.5, -0.5, 0.0])?),
        &FeasibleSet::unit_ball(4),
        HolderSpec::lipschitz(1.0)?,
        &[1e-1, 1e-3, 1e-5],
    )?);
    // a skew-plus-identity affine map on the simplex, with the entropy setup
    let a = [[1.0, 2.0, -1.0], [-2.0, 1.0, 0.5], [1.0, -0.5, 1.0]];
    let l = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let affine = exact_oracle(FnOperator::new(3, move |x: &[f64]| a.iter().map(|r| dot(r, x) - 0.2).collect()));
    runs.extend(fixture_run(
        "affine on simplex",
        &affine,
        ProxSetup::entropy(),
        &FeasibleSet::simplex(3)?,
        HolderSpec::lipschitz(l)?,
        &[1e-1, 1e-2, 1e-3],
    )?);
    Ok(runs)
}

fn summarize_failures(failures: Vec<String>, total: usize, ok: String) -> (bool, String) {
    if failures.is_empty() {
        (true, ok)
    } else {
        let n = failures.len();
        (false, format!("{n}/{total} violations; first: {}", failures[0]))
    }
}

/// `gap ≤ radius/S_k + ε/2` on every solve.
pub fn certificate_check(runs: &[MatrixRun]) -> CheckOutcome {
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for r in runs {
        let bound = r.radius / r.inverse_sum + r.eps / 2.0;
        worst = worst.max(r.gap - bound);
        if r.gap > bound + CERTIFICATE_SLACK {
            failures.push(format!("{} at ε = {}: gap {} > {bound}", r.problem, r.eps, r.gap));
        }
    }
    let (passed, detail) = summarize_failures(
        failures,
        runs.len(),
        format!("{} solves, max(gap − bound) = {worst:.3e}", runs.len()),
    );
    CheckOutcome::new("certificate inequality", passed, detail)
}

/// `max M_i ≤ max(2·L(ε/2), 2·M_init)` on the Hölder runs, and the
/// exponential operator at `ε = 10⁻²` stays below `2·2e^{√2}`.
pub fn ceiling_check(runs: &[MatrixRun]) -> CheckOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut exp_at_1e2 = None;
    let exp_ceiling = 2.0 * vi_bench::exp_operator_lipschitz();
    for r in runs {
        let Some(spec) = r.holder else { continue };
        checked += 1;
        let ceiling = (2.0 * holder_l(spec, r.eps / 2.0)).max(2.0 * r.m_init);
        if r.max_m > ceiling {
            failures.push(format!("{} at ε = {}: max M = {} > {ceiling}", r.problem, r.eps, r.max_m));
        }
        if r.problem.starts_with("exp_operator") && r.eps == 1e-2 {
            exp_at_1e2 = Some(r.max_m);
            if r.max_m > exp_ceiling {
                failures.push(format!("exp operator at ε = 1e-2: max M = {} > {exp_ceiling}", r.max_m));
            }
        }
    }
    let Some(exp_m) = exp_at_1e2 else {
        return CheckOutcome::new("universality ceiling", false, "no exp-operator run at ε = 1e-2".into());
    };
    let (passed, detail) = summarize_failures(
        failures,
        checked,
        format!("{checked} Hölder solves; exp operator at ε = 1e-2 has max M = {exp_m:.4} ≤ 2·2e^√2 = {exp_ceiling:.4}"),
    );
    CheckOutcome::new("universality ceiling", passed, detail)
}

/// Line-search calls `≤ 4k + 2log₂(2·L(ε/2)) − 2log₂(M_init)` with `a = 2`.
pub fn oracle_budget_check(runs: &[MatrixRun]) -> CheckOutcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for r in runs {
        let Some(spec) = r.holder else { continue };
        checked += 1;
        let budget = 4.0 * r.iterations as f64 + 2.0 * (2.0 * holder_l(spec, r.eps / 2.0)).log2() - 2.0 * r.m_init.log2();
        tightest = tightest.min(budget - r.oracle_calls as f64);
        if r.oracle_calls as f64 > budget {
            failures.push(format!("{} at ε = {}: {} calls > {budget:.2}", r.problem, r.eps, r.oracle_calls));
        }
    }
    let (passed, detail) = summarize_failures(
        failures,
        checked,
        format!("{checked} Hölder solves, smallest headroom {tightest:.2} calls"),
    );
    CheckOutcome::new("oracle-call budget", passed, detail)
}

/// Per-restart contraction and the inner-iteration bound for
/// `g(x) = x − c` on the unit ball with `μ = 1`, `ε = 10⁻⁴`, `R₀² = 4`.
pub fn restart_checks() -> Result<(CheckOutcome, CheckOutcome)> {
    let (eps, r0_sq, dim) = (1e-4, 4.0, 5);
    let set = FeasibleSet::unit_ball(dim);
    let bound = inner_iteration_bound(HolderSpec::lipschitz(1.0)?, 1.0, eps, 1.0, r0_sq);
    let mut rng = stream(0x5eed);
    let mut contraction = Vec::new();
    let mut inner = Vec::new();
    let mut most_inner = 0;
    let cases = 8;
    for case in 0..cases {
        let c = set.sample(&mut rng);
        let x0 = set.sample(&mut rng);
        let cc = c.clone();
        let o = exact_oracle(FnOperator::new(dim, move |x: &[f64]| sub(x, &cc)));
        let budget = ToleranceBudget::new(eps)?;
        let out = restart_solve(&o, &set, 1.0, &budget, &x0, r0_sq, 1.0, &SolverOptions::default())?;
        for st in &out.history {
            let e = norm2(&sub(&st.x_p, &c)).powi(2);
            let b = r0_sq * 0.5f64.powi(st.p as i32) + eps / 2.0 + CERTIFICATE_SLACK;
            if e > b {
                contraction.push(format!("case {case}, p = {}: ‖x_p − x*‖² = {e:.3e} > {b:.3e}", st.p));
            }
        }
        let e = norm2(&sub(&out.point, &c)).powi(2);
        if e > eps {
            contraction.push(format!("case {case}: final ‖x − x*‖² = {e:.3e} > ε"));
        }
        let k = out.total_inner_iterations() as u64;
        most_inner = most_inner.max(k);
        if k > bound {
            inner.push(format!("case {case}: {k} inner iterations > {bound}"));
        }
    }
    let (p1, d1) = summarize_failures(contraction, cases, format!("{cases} restart runs contract as 4·2^(−p) + ε/2"));
    let (p2, d2) = summarize_failures(inner, cases, format!("at most {most_inner} inner iterations, bound {bound}"));
    Ok((
        CheckOutcome::new("restart contraction", p1, d1),
        CheckOutcome::new("inner-iteration bound", p2, d2),
    ))
}

/// `a·b^ν·c ≤ (1/δ)^{(1−ν)/(1+ν)}·a^{2/(1+ν)}/2·(b² + c²) + δ/2` on random
/// samples.
pub fn young_check(samples: usize) -> CheckOutcome {
    let mut rng = stream(0x1e33a);
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let scale = [1.0, 10.0, 1e3][i % 3];
        let a = scale * rng.random::<f64>();
        let b = scale * rng.random::<f64>();
        let c = scale * rng.random::<f64>();
        let nu = match i % 50 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random::<f64>(),
        };
        let delta = 10f64.powf(rng.random_range(-8.0..3.0));
        let excess = a * b.powf(nu) * c - holder_young_bound(a, b, c, nu, delta);
        worst = worst.max(excess);
        if excess > YOUNG_SLACK {
            failures.push(format!("a = {a}, b = {b}, c = {c}, ν = {nu}, δ = {delta}: excess {excess:.3e}"));
        }
    }
    let (passed, detail) = summarize_failures(
        failures,
        samples,
        format!("{samples} samples, max excess {worst:.3e}"),
    );
    CheckOutcome::new("Hölder–Young inequality", passed, detail)
}

/// `x/‖x‖` (zero at the origin): Hölder with `ν = 0`, `L₀ = 2`.
fn normalized(x: &[f64]) -> Vec<f64> {
    let r = norm2(x);
    if r == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|v| v / r).collect()
    }
}

/// `½‖y‖²` observed with a gradient perturbed by at most `eta` and the
/// value lowered by `eta·d`: a `(2·eta·d, 1)`-oracle on a set of diameter `d`.
struct PerturbedQuadratic {
    dim: usize,
    eta: f64,
    d: f64,
}

impl DeltaLPair for PerturbedQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let e: Vec<f64> = (0..self.dim).map(|i| ((i as f64 + 1.0) * (7.0 * y[0] + 1.0)).sin()).collect();
        let r = norm2(&e);
        let g = y.iter().zip(&e).map(|(yi, ei)| yi + self.eta * ei / r).collect();
        (0.5 * dot(y, y) - self.eta * self.d, g)
    }
    fn exact_grad(&self, y: &[f64]) -> Option<Vec<f64>> {
        Some(y.to_vec())
    }
}

/// Both oracle inequalities for each adapter on sampled triples.
pub fn conformance_check(samples: usize) -> Result<CheckOutcome> {
    let n = 8;
    let set = FeasibleSet::unit_ball(n);
    let d = set.diameter();
    let exp = vi_bench::gen_exp_operator(n)?.operator;
    let lip = HolderSpec::lipschitz(vi_bench::exp_operator_lipschitz())?;
    let bounded = HolderSpec::new(0.0, 2.0)?;
    let half = HolderSpec::new(0.5, (2.0f64 * (n as f64).sqrt()).sqrt())?;
    let sqrt_op = FnOperator::new(n, |x: &[f64]| x.iter().map(|v| v.signum() * v.abs().sqrt()).collect());
    let eta = 0.05;

    let oracles: Vec<(&str, Box<dyn InexactOracle>, HolderSpec)> = vec![
        ("exact Lipschitz", Box::new(exact_oracle(exp).with_holder(lip)), lip),
        ("exact Hölder ν = 0", Box::new(exact_oracle(FnOperator::new(n, normalized)).with_holder(bounded)), bounded),
        ("exact Hölder ν = 1/2", Box::new(exact_oracle(sqrt_op.clone()).with_holder(half)), half),
        ("noisy Lipschitz", Box::new(noisy_oracle(exp, 0.1, d, 1)?.with_holder(lip)), lip),
        (
            "noisy Hölder ν = 0",
            Box::new(noisy_oracle(FnOperator::new(n, normalized), 0.05, d, 2)?.with_holder(bounded)),
            bounded,
        ),
        ("noisy Hölder ν = 1/2", Box::new(noisy_oracle(sqrt_op, 0.02, d, 3)?.with_holder(half)), half),
        (
            "(δ, L)-oracle",
            Box::new(
                delta_l_oracle(PerturbedQuadratic { dim: n, eta, d }, 2.0 * eta * d, 1.0)?
                    .with_gradient_error(eta, d)?,
            ),
            HolderSpec::lipschitz(1.0)?,
        ),
    ];
    let mut rng = stream(0xc0f0);
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (name, o, spec) in &oracles {
        for dc in [1e-3, 1e-1] {
            let l = o.declared_l(dc).unwrap_or_else(|| holder_l(*spec, dc));
            let rep = check_conformance(o.as_ref(), &set, &Norm::Euclidean, l, dc, samples, &mut rng)?;
            worst = worst.max(rep.upper_excess).max(rep.lower_excess);
            if !rep.holds(CONFORMANCE_SLACK) {
                failures.push(format!(
                    "{name} at δ_c = {dc}: upper {:.3e}, lower {:.3e}",
                    rep.upper_excess, rep.lower_excess
                ));
            }
        }
    }
    let total = 2 * oracles.len();
    let (passed, detail) = summarize_failures(
        failures,
        total,
        format!("{} adapters × 2 δ_c × {samples} triples, max excess {worst:.3e}", oracles.len()),
    );
    Ok(CheckOutcome::new("oracle conformance", passed, detail))
}

/// On the nonsmooth saddle instance at `ε = 1/8`: the certificate reaches
/// `ε`, and `f(û, v) − f(u, v̂)` never exceeds it on sampled `(u, v)`.
pub fn saddle_gap_check(samples: usize) -> Result<CheckOutcome> {
    let eps = 0.125;
    let kind = ExperimentKind::NonsmoothSaddle;
    let dims = Dims::saddle(100, 50);
    let cfg = ExperimentConfig::new(kind);
    let inst = Instance::build(kind, dims, cfg.instance_seed(dims, 0), cfg.lambda_radius)?;
    let Instance::Saddle(op) = &inst else {
        unreachable!("nonsmooth saddle builds a saddle instance")
    };
    let sol = inst.solve(eps, &cfg.solver_options(inst.norm()))?;
    let bound = duality_gap_bound(&sol.certificate);
    let sp = op.problem();
    let (u_hat, v_hat) = sp.blocks(&sol.certificate.average);
    let set = sp.set();
    let mut rng = stream(0x5add1e);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for _ in 0..samples {
        let x = set.sample(&mut rng);
        let (u, v) = sp.blocks(&x);
        let merit = sp.value_at(u_hat, v).unwrap_or(f64::NAN) - sp.value_at(u, v_hat).unwrap_or(f64::NAN);
        worst = worst.max(merit);
        if merit.is_nan() || merit > bound + CERTIFICATE_SLACK {
            failures.push(format!("sampled gap {merit} > bound {bound}"));
        }
    }
    if !(sol.converged && sol.certificate.gap_value <= eps) {
        failures.insert(0, format!("certified gap {} did not reach ε = {eps}", sol.certificate.gap_value));
    }
    let (passed, detail) = summarize_failures(
        failures,
        samples,
        format!(
            "certified gap {:.4} ≤ {eps} after {} iterations; max sampled gap {worst:.4}",
            sol.certificate.gap_value,
            sol.iterations()
        ),
    );
    Ok(CheckOutcome::new("saddle gap domination", passed, detail))
}

/// Every suite, in a fixed order.
pub fn run_all(samples: usize) -> Result<Vec<CheckOutcome>> {
    let runs = solve_matrix()?;
    let (contraction, inner) = restart_checks()?;
    Ok(vec![
        certificate_check(&runs),
        ceiling_check(&runs),
        oracle_budget_check(&runs),
        contraction,
        inner,
        young_check(100 * samples),
        conformance_check(samples)?,
        saddle_gap_check(samples)?,
    ])
}
