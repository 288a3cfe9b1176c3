//! Restarted mirror prox for `μ`-strongly monotone operators.
//!
//! Stage `p` runs [`solve`](crate::gmp::solve) with accuracy `με/2`, the
//! prox-function `d_p(x) = R_p²·d((x − x_p)/R_p)` and the stopping rule
//! `S_k ≥ Ω/μ`; its averaged output becomes `x_{p+1}`. The squared radius
//! follows
//!
//! ```text
//! R_{p+1}² = R₀²·2^{−(p+1)} + 2(1 − 2^{−(p+1)})·Δ,   Δ = ε/4 + (δ_u + 2δ_pu)/μ
//! ```
//!
//! and the loop stops once `p > log₂(2R₀²/ε)`, at which point
//! `‖x_p − x*‖² ≤ ε + (2δ_u + 4δ_pu)/μ`.

use crate::error::{Error, Result};
use crate::gmp::{solve, MInit, SolverOptions, StoppingRule};
use crate::linalg::{ensure_dim, Point, SolveTrace, ToleranceBudget};
use crate::oracle::{HolderSpec, InexactOracle};
use crate::prox::{FeasibleSet, ProxSetup};

#[derive(Debug, Clone, PartialEq)]
pub struct RestartState {
    /// Restart index `p`.
    pub p: usize,
    pub x_p: Point,
    /// `R_p²`.
    pub r_sq: f64,
    /// Inner iterations spent up to this state.
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    /// The final `x_p`.
    pub point: Point,
    pub state: RestartState,
    /// States `p = 0, 1, …`, including the final one.
    pub history: Vec<RestartState>,
    /// One trace per stage.
    pub traces: Vec<SolveTrace>,
    /// Whether every stage met its stopping rule.
    pub converged: bool,
}

impl RestartOutcome {
    pub fn total_inner_iterations(&self) -> usize {
        self.state.inner_iterations
    }

    pub fn total_oracle_calls(&self) -> usize {
        self.traces.iter().map(|t| t.total_oracle_calls()).sum()
    }
}

/// `Δ = ε/4 + (δ_u + 2δ_pu)/μ`.
pub fn restart_floor(eps: f64, delta_u: f64, delta_pu: f64, mu: f64) -> f64 {
    eps / 4.0 + (delta_u + 2.0 * delta_pu) / mu
}

/// `R_p² = R₀²·2^{−p} + 2(1 − 2^{−p})·Δ`.
pub fn restart_radius_sq(r0_sq: f64, p: usize, floor: f64) -> f64 {
    let h = 0.5f64.powi(p as i32);
    r0_sq * h + 2.0 * (1.0 - h) * floor
}

/// Upper bound on the total number of inner iterations for a Hölder
/// operator:
/// `⌈(L_ν/μ)^{2/(1+ν)} · 2^{2/(1+ν)}·Ω / ε^{(1−ν)/(1+ν)} · log₂(2R₀²/ε)⌉`.
pub fn inner_iteration_bound(spec: HolderSpec, mu: f64, eps: f64, omega: f64, r0_sq: f64) -> u64 {
    let HolderSpec { nu, l_nu } = spec;
    let e = 2.0 / (1.0 + nu);
    let per_stage = (l_nu / mu).powf(e) * 2f64.powf(e) * omega / eps.powf((1.0 - nu) / (1.0 + nu));
    let v = (per_stage * (2.0 * r0_sq / eps).log2()).ceil();
    if v > 0.0 {
        v as u64
    } else {
        0
    }
}

/// Runs the restart scheme from `x0` with `‖x0 − x*‖² ≤ r0_sq` (the caller's
/// responsibility). Only the Euclidean prox-function can be recentered.
///
/// Every stage after the first starts its line search from the last `M`
/// accepted by the previous stage.
#[allow(clippy::too_many_arguments)]
pub fn restart_solve<O: InexactOracle + ?Sized>(
    oracle: &O,
    set: &FeasibleSet,
    mu: f64,
    budget: &ToleranceBudget,
    x0: &Point,
    r0_sq: f64,
    omega: f64,
    options: &SolverOptions,
) -> Result<RestartOutcome> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::contract(format!("strong monotonicity parameter must be positive, got {mu}")));
    }
    if !(r0_sq > 0.0 && r0_sq.is_finite()) {
        return Err(Error::contract(format!("R₀² must be positive, got {r0_sq}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::contract(format!("Ω must be positive, got {omega}")));
    }
    let budget = budget.validated()?;
    ensure_dim(set.dim(), x0.dim())?;
    ensure_dim(set.dim(), oracle.dim())?;
    if !set.contains(x0, 1e-12) {
        return Err(Error::contract("restart start point lies outside the feasible set"));
    }

    let eps = budget.eps;
    let delta_u = budget.delta_u.max(oracle.delta_u());
    let floor = restart_floor(eps, delta_u, budget.delta_pu, mu);
    let stop_after = (2.0 * r0_sq / eps).log2();

    let inner_budget = ToleranceBudget::new(mu * eps / 2.0)?
        .with_delta_u(delta_u)?
        .with_delta_pu(budget.delta_pu)?;
    let rule = StoppingRule::InverseSumTarget(omega / mu);
    let mut opts = options.clone();

    let mut state = RestartState {
        p: 0,
        x_p: x0.clone(),
        r_sq: r0_sq,
        inner_iterations: 0,
    };
    let mut history = vec![state.clone()];
    let mut traces = Vec::new();
    let mut converged = true;

    loop {
        let setup = ProxSetup::euclidean().recentered(state.x_p.clone(), state.r_sq.sqrt())?;
        let sol = solve(oracle, &setup, set, &inner_budget, rule, &opts)?;
        converged &= sol.converged;
        opts.m_init = MInit::Fixed(sol.last_m());

        let p = state.p + 1;
        state = RestartState {
            p,
            x_p: sol.certificate.average.clone(),
            r_sq: restart_radius_sq(r0_sq, p, floor),
            inner_iterations: state.inner_iterations + sol.iterations(),
        };
        history.push(state.clone());
        traces.push(sol.trace);
        if p as f64 > stop_after {
            break;
        }
    }

    Ok(RestartOutcome {
        point: state.x_p.clone(),
        state,
        history,
        traces,
        converged,
    })
}
