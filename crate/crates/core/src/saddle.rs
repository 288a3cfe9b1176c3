//! Convex–concave saddle problems `min_{u ∈ Q₁} max_{v ∈ Q₂} f(u, v)` as VIs.
//!
//! The VI operator is `g(u, v) = (∇_u f(u, v), −∇_v f(u, v))` on
//! `Q = Q₁ × Q₂`. With the norm `‖(u, v)‖ = max{‖u‖, ‖v‖}` (dual: sum of
//! block norms), block Hölder constants add up; with the Euclidean product
//! norm they combine as `√(2 Σ L_ij²)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gmp::Certificate;
use crate::linalg::{ensure_dim, DualVector, Norm, Point};
use crate::oracle::{InexactOracle, Operator};
use crate::prox::FeasibleSet;

/// `f(u, v)` through its partial (sub)gradients.
pub trait SaddleFunction: Send + Sync {
    /// `(dim u, dim v)`.
    fn dims(&self) -> (usize, usize);
    fn grad_u(&self, u: &[f64], v: &[f64]) -> Vec<f64>;
    fn grad_v(&self, u: &[f64], v: &[f64]) -> Vec<f64>;
    fn value(&self, _u: &[f64], _v: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: SaddleFunction + ?Sized> SaddleFunction for Arc<T> {
    fn dims(&self) -> (usize, usize) {
        (**self).dims()
    }
    fn grad_u(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).grad_u(u, v)
    }
    fn grad_v(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).grad_v(u, v)
    }
    fn value(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        (**self).value(u, v)
    }
}

/// How the norms of the two blocks are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormMode {
    /// `max{‖u‖, ‖v‖}`, dual `‖z‖ + ‖w‖`.
    #[default]
    MaxSum,
    /// `√(‖u‖² + ‖v‖²)`, self-dual.
    L2Product,
}

impl NormMode {
    /// The norm on `E₁ × E₂` with the `u`-block of length `split`.
    pub fn norm(&self, split: usize) -> Norm {
        match self {
            NormMode::MaxSum => Norm::ProductMax { split },
            NormMode::L2Product => Norm::Euclidean,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SaddleProblem<F> {
    pub function: F,
    pub q1: FeasibleSet,
    pub q2: FeasibleSet,
    pub norm_mode: NormMode,
}

impl<F: SaddleFunction> SaddleProblem<F> {
    pub fn new(function: F, q1: FeasibleSet, q2: FeasibleSet) -> Result<Self> {
        let (n1, n2) = function.dims();
        ensure_dim(n1, q1.dim())?;
        ensure_dim(n2, q2.dim())?;
        if n1 == 0 {
            return Err(Error::contract("the minimization block must be non-empty"));
        }
        Ok(Self {
            function,
            q1,
            q2,
            norm_mode: NormMode::MaxSum,
        })
    }

    pub fn with_norm_mode(mut self, mode: NormMode) -> Self {
        self.norm_mode = mode;
        self
    }

    /// `dim u`.
    pub fn split(&self) -> usize {
        self.q1.dim()
    }

    pub fn dim(&self) -> usize {
        self.q1.dim() + self.q2.dim()
    }

    /// `Q₁ × Q₂`.
    pub fn set(&self) -> FeasibleSet {
        FeasibleSet::product(self.q1.clone(), self.q2.clone())
    }

    pub fn norm(&self) -> Norm {
        self.norm_mode.norm(self.split())
    }

    /// Splits `x = (u, v)`.
    pub fn blocks<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.split())
    }

    pub fn value_at(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        self.function.value(u, v)
    }

    /// `g(u, v) = (∇_u f, −∇_v f)`.
    pub fn operator_value(&self, x: &[f64]) -> Vec<f64> {
        let (u, v) = self.blocks(x);
        let mut g = self.function.grad_u(u, v);
        g.extend(self.function.grad_v(u, v).into_iter().map(|w| -w));
        g
    }
}

/// The monotone operator of a saddle problem.
#[derive(Debug, Clone)]
pub struct SaddleOperator<F> {
    problem: SaddleProblem<F>,
}

impl<F: SaddleFunction> SaddleOperator<F> {
    pub fn problem(&self) -> &SaddleProblem<F> {
        &self.problem
    }
}

pub fn make_vi_operator<F: SaddleFunction>(sp: SaddleProblem<F>) -> SaddleOperator<F> {
    SaddleOperator { problem: sp }
}

impl<F: SaddleFunction> Operator for SaddleOperator<F> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.problem.operator_value(x)
    }
}

/// Hölder constants of the four blocks `∂_u∇_u`, `∂_v∇_u`, `∂_u∇_v`, `∂_v∇_v`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockConstants {
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l22: f64,
}

impl BlockConstants {
    pub fn new(l11: f64, l12: f64, l21: f64, l22: f64) -> Result<Self> {
        if [l11, l12, l21, l22].iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::contract("block constants must be non-negative"));
        }
        Ok(Self { l11, l12, l21, l22 })
    }

    fn as_array(&self) -> [f64; 4] {
        [self.l11, self.l12, self.l21, self.l22]
    }
}

/// Hölder constant of the assembled operator: the sum of the block
/// constants for [`NormMode::MaxSum`], `√(2 Σ L_ij²)` for
/// [`NormMode::L2Product`].
pub fn holder_constant_of_blocks(blocks: BlockConstants, mode: NormMode) -> f64 {
    let l = blocks.as_array();
    match mode {
        NormMode::MaxSum => l.iter().sum(),
        NormMode::L2Product => (2.0 * l.iter().map(|v| v * v).sum::<f64>()).sqrt(),
    }
}

/// Reduces blocks with exponents `ν_ij` to the common exponent
/// `ν = min ν_ij` on a set of diameter `diameter`, rescaling each constant by
/// `D^{ν_ij − ν}`.
pub fn common_exponent(
    exponents: [f64; 4],
    blocks: BlockConstants,
    diameter: f64,
) -> Result<(f64, BlockConstants)> {
    if exponents.iter().any(|nu| !(0.0..=1.0).contains(nu)) {
        return Err(Error::contract("block exponents must lie in [0, 1]"));
    }
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(Error::contract("diameter must be positive"));
    }
    let nu = exponents.iter().copied().fold(1.0, f64::min);
    let l = blocks.as_array();
    let s: Vec<f64> = (0..4).map(|i| l[i] * diameter.powf(exponents[i] - nu)).collect();
    Ok((nu, BlockConstants::new(s[0], s[1], s[2], s[3])?))
}

/// Upper bound on `max_v f(û, v) − min_u f(u, v̂)` for the averaged point of
/// a solve on [`make_vi_operator`], valid up to the run's δ-terms.
pub fn duality_gap_bound(cert: &Certificate) -> f64 {
    cert.gap_value
}

/// A convex function through values and a subgradient selection.
pub trait ConvexFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn subgradient(&self, x: &[f64]) -> Vec<f64>;
}

/// `min f(x)` over `x ∈ Q` subject to `φ_p(x) ≤ 0`.
#[derive(Clone)]
pub struct ConstrainedProblem {
    pub objective: Arc<dyn ConvexFunction>,
    pub constraints: Vec<Arc<dyn ConvexFunction>>,
    /// Radius of the ball that compactifies the multipliers.
    pub lambda_radius: Option<f64>,
    pub slater_point: Option<Point>,
}

impl ConstrainedProblem {
    pub fn new(
        objective: Arc<dyn ConvexFunction>,
        constraints: Vec<Arc<dyn ConvexFunction>>,
    ) -> Result<Self> {
        let n = objective.dim();
        for c in &constraints {
            ensure_dim(n, c.dim())?;
        }
        Ok(Self {
            objective,
            constraints,
            lambda_radius: None,
            slater_point: None,
        })
    }

    pub fn with_lambda_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::contract(format!("lambda radius must be positive, got {radius}")));
        }
        self.lambda_radius = Some(radius);
        Ok(self)
    }

    /// Records a strictly feasible point; fails unless every `φ_p(x̄) < 0`.
    pub fn with_slater_point(mut self, x: Point) -> Result<Self> {
        ensure_dim(self.objective.dim(), x.dim())?;
        if let Some(p) = self.constraints.iter().position(|c| c.value(&x) >= 0.0) {
            return Err(Error::contract(format!("constraint {p} is not strictly satisfied at the Slater point")));
        }
        self.slater_point = Some(x);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }
}

impl std::fmt::Debug for ConstrainedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstrainedProblem")
            .field("dim", &self.dim())
            .field("constraints", &self.constraints.len())
            .field("lambda_radius", &self.lambda_radius)
            .finish()
    }
}

/// `L(x, λ) = f(x) + Σ λ_p φ_p(x)`.
#[derive(Clone, Debug)]
pub struct Lagrangian {
    problem: ConstrainedProblem,
}

impl Lagrangian {
    pub fn problem(&self) -> &ConstrainedProblem {
        &self.problem
    }
}

impl SaddleFunction for Lagrangian {
    fn dims(&self) -> (usize, usize) {
        (self.problem.dim(), self.problem.constraints.len())
    }

    fn grad_u(&self, x: &[f64], lambda: &[f64]) -> Vec<f64> {
        let mut g = self.problem.objective.subgradient(x);
        for (c, &l) in self.problem.constraints.iter().zip(lambda) {
            if l != 0.0 {
                for (gi, si) in g.iter_mut().zip(c.subgradient(x)) {
                    *gi += l * si;
                }
            }
        }
        g
    }

    fn grad_v(&self, x: &[f64], _lambda: &[f64]) -> Vec<f64> {
        self.problem.constraints.iter().map(|c| c.value(x)).collect()
    }

    fn value(&self, x: &[f64], lambda: &[f64]) -> Option<f64> {
        let mut v = self.problem.objective.value(x);
        for (c, &l) in self.problem.constraints.iter().zip(lambda) {
            v += l * c.value(x);
        }
        Some(v)
    }
}

/// The Lagrangian saddle problem over `Q × {λ ≥ 0, ‖λ‖₂ ≤ r}`.
pub fn lagrangian_saddle(cp: ConstrainedProblem, q: FeasibleSet) -> Result<SaddleProblem<Lagrangian>> {
    let radius = cp
        .lambda_radius
        .ok_or_else(|| Error::Configuration("the Lagrangian needs a bound on the multipliers".into()))?;
    ensure_dim(cp.dim(), q.dim())?;
    let m = cp.constraints.len();
    SaddleProblem::new(Lagrangian { problem: cp }, q, FeasibleSet::nonneg_ball(m, radius)?)
}

/// A saddle function whose partial gradients come from `(δ, L)`-oracles of
/// `f(·, v)` and `−f(u, ·)`; viewed as a VI oracle it has `L(δ_c) ≡ L` and
/// `δ_u = 6δ`.
#[derive(Debug, Clone)]
pub struct SaddleDeltaLOracle<F> {
    function: F,
    delta: f64,
    l: f64,
}

pub fn saddle_delta_l_oracle<F: SaddleFunction>(function: F, delta: f64, l: f64) -> Result<SaddleDeltaLOracle<F>> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::contract(format!("delta must be non-negative, got {delta}")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::contract(format!("L must be positive, got {l}")));
    }
    Ok(SaddleDeltaLOracle { function, delta, l })
}

impl<F: SaddleFunction> SaddleDeltaLOracle<F> {
    pub fn function(&self) -> &F {
        &self.function
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl<F: SaddleFunction> InexactOracle for SaddleDeltaLOracle<F> {
    fn dim(&self) -> usize {
        let (a, b) = self.function.dims();
        a + b
    }
    fn evaluate(&self, x: &Point, _delta_c: f64) -> Result<DualVector> {
        ensure_dim(self.dim(), x.dim())?;
        let (u, v) = x.split_at(self.function.dims().0);
        let mut g = self.function.grad_u(u, v);
        g.extend(self.function.grad_v(u, v).into_iter().map(|w| -w));
        DualVector::new(g).map_err(|_| Error::NonFinite("oracle value"))
    }
    fn delta_u(&self) -> f64 {
        6.0 * self.delta
    }
    fn declared_l(&self, _delta_c: f64) -> Option<f64> {
        Some(self.l)
    }
}
