//! Adaptive generalized mirror prox.
//!
//! Each outer iteration `k` searches for the smallest `M_k` on the geometric
//! grid `a^{i−1}·M_{k−1}` (`i = 0, 1, …`) for which the extragradient pair
//!
//! ```text
//! w_k     = prox(z_k, g̃(z_k))      with constant M_k
//! z_{k+1} = prox(z_k, g̃(w_k))      with constant M_k
//! ```
//!
//! passes [`check_condition`]. The first trial therefore uses `M_{k−1}/a`,
//! which is what lets the method adapt downwards. The output is the weighted
//! average `ŵ_k = (1/S_k) Σ M_i⁻¹ w_i`, `S_k = Σ M_i⁻¹`, together with the
//! computable certificate
//!
//! ```text
//! gap_k = max_{u ∈ Q} (1/S_k) Σ M_i⁻¹ ⟨g̃(w_i), w_i − u⟩
//!       ≤ max_u V[z₀](u)/S_k + ε/2 + δ_u + 2δ_pu.
//! ```

use crate::error::{Error, Result};
use crate::linalg::{dot, ensure_dim, DualVector, IterationRecord, Norm, Point, SolveTrace, ToleranceBudget};
use crate::oracle::InexactOracle;
use crate::prox::{prox_map, FeasibleSet, ProxSetup};

/// When to stop the outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Run exactly `K` outer iterations.
    MaxIters(usize),
    /// Stop once `D/S_k ≤ ε/2`, where `D ≥ max_u V[z₀](u)`. The certificate
    /// is then at most `ε + δ_u + 2δ_pu`.
    CertifiedGap(f64),
    /// Stop once `S_k ≥ T`.
    InverseSumTarget(f64),
}

impl StoppingRule {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StoppingRule::MaxIters(k) => k >= 1,
            StoppingRule::CertifiedGap(d) => d > 0.0 && d.is_finite(),
            StoppingRule::InverseSumTarget(t) => t > 0.0 && t.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::contract(format!("stopping rule parameter must be positive: {self:?}")))
        }
    }

    fn satisfied(&self, k: usize, s: f64, eps: f64) -> bool {
        match *self {
            StoppingRule::MaxIters(n) => k >= n,
            StoppingRule::CertifiedGap(d) => d / s <= eps / 2.0,
            StoppingRule::InverseSumTarget(t) => s >= t,
        }
    }
}

/// Initial line-search constant `M_{−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MInit {
    /// `‖g̃(p₁) − g̃(p₂)‖_* / ‖p₁ − p₂‖` with `p_j` the projections of the
    /// first two unit vectors onto `Q`. Falls back to `1` when the quotient
    /// is zero or undefined.
    #[default]
    DifferenceQuotient,
    Fixed(f64),
}

/// Controlled oracle error requested at every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaCPolicy {
    /// `δ_c = ε/4`.
    #[default]
    Quarter,
    /// `δ_c = ε/2`, admissible when the prox-mapping is exact.
    Half,
}

impl DeltaCPolicy {
    pub fn delta_c(&self, eps: f64) -> f64 {
        match self {
            DeltaCPolicy::Quarter => eps / 4.0,
            DeltaCPolicy::Half => eps / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Norm in which the acceptance test measures distances.
    pub norm: Norm,
    /// Line-search factor `a > 1`.
    pub search_factor: f64,
    /// Inner trials allowed per iteration before reporting divergence.
    pub max_trials: usize,
    /// Outer iterations allowed before giving up unconverged.
    pub max_iterations: usize,
    pub m_init: MInit,
    pub delta_c: DeltaCPolicy,
    /// Store every `w_i` and `g̃(w_i)`.
    pub keep_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            norm: Norm::Euclidean,
            search_factor: 2.0,
            max_trials: 60,
            max_iterations: 1_000_000,
            m_init: MInit::DifferenceQuotient,
            delta_c: DeltaCPolicy::Quarter,
            keep_history: false,
        }
    }
}

impl SolverOptions {
    fn validate(&self, dim: usize) -> Result<()> {
        self.norm.validate(dim)?;
        if !(self.search_factor > 1.0 && self.search_factor.is_finite()) {
            return Err(Error::contract(format!(
                "search factor must exceed 1, got {}",
                self.search_factor
            )));
        }
        if self.max_trials == 0 || self.max_iterations == 0 {
            return Err(Error::contract("trial and iteration limits must be positive"));
        }
        if let MInit::Fixed(m) = self.m_init {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::contract(format!("M_init must be positive, got {m}")));
            }
        }
        Ok(())
    }
}

/// The averaged output of a solve and its accuracy certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `w_i`, only when history was kept.
    pub iterates: Vec<Point>,
    /// `M_i⁻¹`.
    pub weights: Vec<f64>,
    /// `S_k`.
    pub inverse_sum: f64,
    /// `ŵ_k`.
    pub average: Point,
    /// `s̄ = (1/S_k) Σ M_i⁻¹ g̃(w_i)`.
    pub averaged_dual: DualVector,
    /// `max_{u ∈ Q} (1/S_k) Σ M_i⁻¹ ⟨g̃(w_i), w_i − u⟩`.
    pub gap_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub certificate: Certificate,
    pub trace: SolveTrace,
    /// `g̃(w_i)`, only when history was kept.
    pub dual_values: Vec<DualVector>,
    /// Whether the stopping rule was met within the iteration limit.
    pub converged: bool,
    /// `z₀`.
    pub start: Point,
    /// `z_k` after the last iteration.
    pub last: Point,
    pub m_init: f64,
    /// Oracle calls spent on computing `M_init` (not part of the trace).
    pub init_oracle_calls: usize,
    pub budget: ToleranceBudget,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn oracle_calls(&self) -> usize {
        self.trace.total_oracle_calls()
    }

    /// The last accepted `M_k`.
    pub fn last_m(&self) -> f64 {
        self.trace.records().last().map_or(self.m_init, |r| r.m)
    }

    /// `radius/S_k + ε/2 + δ_u + 2δ_pu`, the a-priori bound on the
    /// certificate given `radius ≥ max_u V[z₀](u)`.
    pub fn gap_bound(&self, radius: f64) -> f64 {
        radius / self.certificate.inverse_sum
            + self.budget.eps / 2.0
            + self.budget.delta_u
            + 2.0 * self.budget.delta_pu
    }
}

/// The acceptance test of the line search:
/// `⟨gw − gz, w − z_next⟩ ≤ M/2 (‖w − z‖² + ‖w − z_next‖²) + ε/2 + δ_u`.
#[allow(clippy::too_many_arguments)]
pub fn check_condition(
    norm: &Norm,
    gw: &DualVector,
    gz: &DualVector,
    w: &Point,
    z_next: &Point,
    z: &Point,
    m: f64,
    eps: f64,
    delta_u: f64,
) -> bool {
    let n = w.dim();
    let mut lhs = 0.0;
    for i in 0..n {
        lhs += (gw[i] - gz[i]) * (w[i] - z_next[i]);
    }
    let a = norm.dist(w, z);
    let b = norm.dist(w, z_next);
    lhs <= m / 2.0 * (a * a + b * b) + eps / 2.0 + delta_u
}

/// `Σ w_i p_i / Σ w_i`.
pub fn average(points: &[Point], weights: &[f64]) -> Result<Point> {
    if points.is_empty() {
        return Err(Error::Empty("points"));
    }
    ensure_dim(points.len(), weights.len())?;
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::contract("averaging weights must be positive"));
    }
    let dim = points[0].dim();
    let total: f64 = weights.iter().sum();
    let mut acc = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        ensure_dim(dim, p.dim())?;
        for (a, v) in acc.iter_mut().zip(p.iter()) {
            *a += w * v;
        }
    }
    Point::new(acc.into_iter().map(|a| a / total).collect())
}

/// Recomputes the certificate from a trace that kept its iterates and the
/// oracle values at those iterates.
pub fn gap_certificate(
    trace: &SolveTrace,
    values: &[DualVector],
    set: &FeasibleSet,
) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::contract("gap certificate of an empty trace"));
    }
    ensure_dim(trace.len(), values.len())?;
    let dim = set.dim();
    let mut total = 0.0;
    let mut weighted = 0.0;
    let mut s = vec![0.0; dim];
    for (rec, g) in trace.records().iter().zip(values) {
        let w = rec
            .iterate
            .as_ref()
            .ok_or_else(|| Error::contract("trace does not hold its iterates"))?;
        ensure_dim(dim, w.dim())?;
        ensure_dim(dim, g.dim())?;
        let lam = rec.m.recip();
        total += lam;
        weighted += lam * dot(g, w);
        for (si, gi) in s.iter_mut().zip(g.iter()) {
            *si -= lam * gi;
        }
    }
    let (sup, _) = set.support(&s);
    Ok((weighted + sup) / total)
}

fn initial_m<O: InexactOracle + ?Sized>(
    oracle: &O,
    set: &FeasibleSet,
    options: &SolverOptions,
    delta_c: f64,
) -> Result<(f64, usize)> {
    match options.m_init {
        MInit::Fixed(m) => Ok((m, 0)),
        MInit::DifferenceQuotient => {
            let dim = set.dim();
            if dim < 2 {
                return Ok((1.0, 0));
            }
            let p1 = Point::from_raw(set.project(&Point::basis(dim, 0)));
            let p2 = Point::from_raw(set.project(&Point::basis(dim, 1)));
            let g1 = oracle.evaluate(&p1, delta_c)?;
            let g2 = oracle.evaluate(&p2, delta_c)?;
            let num = options.norm.dual_norm_unchecked(&crate::linalg::sub(&g1, &g2));
            let den = options.norm.dist(&p1, &p2);
            let q = num / den;
            Ok((if q > 0.0 && q.is_finite() { q } else { 1.0 }, 2))
        }
    }
}

/// Smallest line-search constant tried; keeps `M⁻¹` and `S_k` finite when
/// the operator is (locally) constant.
const M_FLOOR: f64 = 1e-150;

/// Runs the adaptive mirror-prox method from `z₀ = argmin_Q d`.
pub fn solve<O: InexactOracle + ?Sized>(
    oracle: &O,
    setup: &ProxSetup,
    set: &FeasibleSet,
    budget: &ToleranceBudget,
    rule: StoppingRule,
    options: &SolverOptions,
) -> Result<Solution> {
    let mut budget = budget.validated()?;
    let dim = set.dim();
    ensure_dim(dim, oracle.dim())?;
    options.validate(dim)?;
    rule.validate()?;

    let eps = budget.eps;
    let delta_c = options.delta_c.delta_c(eps);
    // The oracle's declaration and the caller's budget describe the same
    // quantity; the larger one is used and reported back.
    budget.delta_u = budget.delta_u.max(oracle.delta_u());
    let delta_u = budget.delta_u;
    let tol = budget.prox_tol;
    let a = options.search_factor;

    let z0 = setup.anchor(set)?;
    let (m_init, init_calls) = initial_m(oracle, set, options, delta_c)?;

    let mut z = z0.clone();
    let mut m_prev = m_init;
    let mut trace = SolveTrace::new();
    let mut iterates = Vec::new();
    let mut dual_values = Vec::new();
    let mut s_total = 0.0;
    let mut sum_w = vec![0.0; dim];
    let mut sum_g = vec![0.0; dim];
    let mut sum_gw = 0.0;
    let mut converged = false;

    while trace.len() < options.max_iterations {
        let k = trace.len();
        let mut m = (m_prev / a).max(M_FLOOR);
        let mut trials = 0;
        let (w, z_next, gw) = loop {
            trials += 1;
            if trials > options.max_trials {
                return Err(Error::Diverged {
                    iteration: k,
                    trials: trials - 1,
                    last_m: m / a,
                });
            }
            let gz = oracle.evaluate(&z, delta_c)?;
            let w = prox_map(setup, set, &z, &gz, m, tol)?;
            let gw = oracle.evaluate(&w, delta_c)?;
            let z_next = prox_map(setup, set, &z, &gw, m, tol)?;
            if check_condition(&options.norm, &gw, &gz, &w, &z_next, &z, m, eps, delta_u) {
                break (w, z_next, gw);
            }
            m *= a;
        };

        let lam = m.recip();
        s_total += lam;
        sum_gw += lam * dot(&gw, &w);
        for i in 0..dim {
            sum_w[i] += lam * w[i];
            sum_g[i] += lam * gw[i];
        }
        trace.push(IterationRecord {
            m,
            inner_trials: trials,
            oracle_calls: 2 * trials,
            iterate: options.keep_history.then(|| w.clone()),
        });
        if options.keep_history {
            iterates.push(w);
            dual_values.push(gw);
        }
        z = z_next;
        m_prev = m;

        if rule.satisfied(trace.len(), s_total, eps) {
            converged = true;
            break;
        }
    }

    let average = Point::from_raw(sum_w.iter().map(|v| v / s_total).collect());
    let neg: Vec<f64> = sum_g.iter().map(|v| -v).collect();
    let (sup, _) = set.support(&neg);
    let gap_value = (sum_gw + sup) / s_total;
    let averaged_dual = DualVector::from_raw(sum_g.iter().map(|v| v / s_total).collect());

    Ok(Solution {
        certificate: Certificate {
            iterates,
            weights: trace.weights(),
            inverse_sum: s_total,
            average,
            averaged_dual,
            gap_value,
        },
        trace,
        dual_values,
        converged,
        start: z0,
        last: z,
        m_init,
        init_oracle_calls: init_calls,
        budget,
    })
}
