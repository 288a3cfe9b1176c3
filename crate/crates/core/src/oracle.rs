//! Inexact oracles for monotone operators.
//!
//! An oracle returns `g̃(x, δ_c, δ_u)` such that, for some `L(δ_c)` and all
//! `x, y, z ∈ Q`,
//!
//! ```text
//! ⟨g̃(y) − g̃(x), y − z⟩ ≤ L(δ_c)/2 · (‖y − x‖² + ‖y − z‖²) + δ_c + δ_u
//! ⟨g̃(y) − g(y),  y − z⟩ ≥ −δ_u
//! ```
//!
//! `δ_c` is chosen by the caller, `δ_u` is a property of the oracle. The
//! constructors here cover exact and Hölder-continuous operators, operators
//! observed with bounded noise, and gradients of `(δ, L)`-oracles.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, ensure_dim, DualVector, Norm, Point};
use crate::prox::{random_direction, FeasibleSet};

/// A (possibly nonlinear) map `E → E*`.
pub trait Operator: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

impl<T: Operator + ?Sized> Operator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
}

impl<T: Operator + ?Sized> Operator for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
}

impl<T: Operator + ?Sized> Operator for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }
}

/// Adapts a closure into an [`Operator`].
#[derive(Clone)]
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Operator for FnOperator<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

/// An oracle in the sense described in the module docs.
pub trait InexactOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// `g̃(x, δ_c, δ_u)`.
    fn evaluate(&self, x: &Point, delta_c: f64) -> Result<DualVector>;

    /// The declared uncontrolled error `δ_u`.
    fn delta_u(&self) -> f64;

    /// The exact operator value, when the oracle knows it.
    fn exact(&self, _x: &Point) -> Option<DualVector> {
        None
    }

    /// The declared `L(δ_c)`, when known.
    fn declared_l(&self, _delta_c: f64) -> Option<f64> {
        None
    }
}

impl<T: InexactOracle + ?Sized> InexactOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, x: &Point, delta_c: f64) -> Result<DualVector> {
        (**self).evaluate(x, delta_c)
    }
    fn delta_u(&self) -> f64 {
        (**self).delta_u()
    }
    fn exact(&self, x: &Point) -> Option<DualVector> {
        (**self).exact(x)
    }
    fn declared_l(&self, delta_c: f64) -> Option<f64> {
        (**self).declared_l(delta_c)
    }
}

impl<T: InexactOracle + ?Sized> InexactOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, x: &Point, delta_c: f64) -> Result<DualVector> {
        (**self).evaluate(x, delta_c)
    }
    fn delta_u(&self) -> f64 {
        (**self).delta_u()
    }
    fn exact(&self, x: &Point) -> Option<DualVector> {
        (**self).exact(x)
    }
    fn declared_l(&self, delta_c: f64) -> Option<f64> {
        (**self).declared_l(delta_c)
    }
}

fn apply_checked<G: Operator + ?Sized>(op: &G, x: &Point) -> Result<DualVector> {
    ensure_dim(op.dim(), x.dim())?;
    let v = op.apply(x);
    ensure_dim(op.dim(), v.len())?;
    DualVector::new(v).map_err(|_| Error::NonFinite("oracle value"))
}

/// Hölder class `‖g(x) − g(y)‖_* ≤ L_ν‖x − y‖^ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderSpec {
    pub nu: f64,
    pub l_nu: f64,
}

impl HolderSpec {
    pub fn new(nu: f64, l_nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::contract(format!("Hölder exponent must lie in [0, 1], got {nu}")));
        }
        if !(l_nu > 0.0 && l_nu.is_finite()) {
            return Err(Error::contract(format!("Hölder constant must be positive, got {l_nu}")));
        }
        Ok(Self { nu, l_nu })
    }

    /// Lipschitz class (`ν = 1`).
    pub fn lipschitz(l: f64) -> Result<Self> {
        Self::new(1.0, l)
    }
}

/// `L(δ_c) = (1/(2δ_c))^{(1−ν)/(1+ν)} · L_ν^{2/(1+ν)}`: the constant that makes
/// a Hölder-continuous operator an inexact oracle with `δ_u = 0`.
pub fn holder_l(spec: HolderSpec, delta_c: f64) -> f64 {
    let HolderSpec { nu, l_nu } = spec;
    (0.5 / delta_c).powf((1.0 - nu) / (1.0 + nu)) * l_nu.powf(2.0 / (1.0 + nu))
}

/// Right-hand side of the inequality
/// `a·b^ν·c ≤ (1/δ)^{(1−ν)/(1+ν)} · a^{2/(1+ν)}/2 · (b² + c²) + δ/2`
/// that turns Hölder continuity into an inexact Lipschitz model.
pub fn holder_young_bound(a: f64, b: f64, c: f64, nu: f64, delta: f64) -> f64 {
    (1.0 / delta).powf((1.0 - nu) / (1.0 + nu)) * a.powf(2.0 / (1.0 + nu)) / 2.0 * (b * b + c * c)
        + delta / 2.0
}

/// Oracle returning the exact operator value; `δ_u = 0`.
#[derive(Clone)]
pub struct ExactOracle<G> {
    op: G,
    holder: Option<HolderSpec>,
}

pub fn exact_oracle<G: Operator>(g: G) -> ExactOracle<G> {
    ExactOracle { op: g, holder: None }
}

impl<G: Operator> ExactOracle<G> {
    /// Declares the operator Hölder-continuous, so that
    /// [`InexactOracle::declared_l`] reports [`holder_l`].
    pub fn with_holder(mut self, spec: HolderSpec) -> Self {
        self.holder = Some(spec);
        self
    }

    pub fn operator(&self) -> &G {
        &self.op
    }
}

impl<G: Operator> InexactOracle for ExactOracle<G> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn evaluate(&self, x: &Point, _delta_c: f64) -> Result<DualVector> {
        apply_checked(&self.op, x)
    }
    fn delta_u(&self) -> f64 {
        0.0
    }
    fn exact(&self, x: &Point) -> Option<DualVector> {
        apply_checked(&self.op, x).ok()
    }
    fn declared_l(&self, delta_c: f64) -> Option<f64> {
        self.holder.map(|h| holder_l(h, delta_c))
    }
}

/// Operator observed with bounded additive noise `‖ḡ(x) − g(x)‖_* ≤ δ̄`
/// on a set of diameter at most `D`; declares `δ_u = 2·δ̄·D`.
///
/// Noise is a deterministic function of `(seed, x)`: a direction uniform on
/// the dual unit sphere scaled by a radius uniform in `[0, δ̄]`, drawn from a
/// ChaCha8 stream seeded by a SplitMix64 digest of the seed and the bit
/// patterns of `x`. Repeated evaluation at the same point returns the same
/// value.
#[derive(Clone)]
pub struct NoisyOracle<G> {
    op: G,
    noise_bound: f64,
    diameter: f64,
    seed: u64,
    norm: Norm,
    holder: Option<HolderSpec>,
}

pub fn noisy_oracle<G: Operator>(
    g: G,
    noise_bound: f64,
    diameter: f64,
    seed: u64,
) -> Result<NoisyOracle<G>> {
    if !(noise_bound >= 0.0 && noise_bound.is_finite()) {
        return Err(Error::contract(format!("noise bound must be non-negative, got {noise_bound}")));
    }
    if !(diameter >= 0.0 && diameter.is_finite()) {
        return Err(Error::contract(format!("diameter must be non-negative, got {diameter}")));
    }
    Ok(NoisyOracle {
        op: g,
        noise_bound,
        diameter,
        seed,
        norm: Norm::Euclidean,
        holder: None,
    })
}

impl<G: Operator> NoisyOracle<G> {
    /// Measures the noise in the dual of `norm` instead of the Euclidean norm.
    pub fn with_norm(mut self, norm: Norm) -> Result<Self> {
        norm.validate(self.op.dim())?;
        self.norm = norm;
        Ok(self)
    }

    pub fn with_holder(mut self, spec: HolderSpec) -> Self {
        self.holder = Some(spec);
        self
    }

    pub fn noise_bound(&self) -> f64 {
        self.noise_bound
    }

    fn noise(&self, x: &[f64]) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(point_digest(self.seed, x));
        let mut dir = random_direction(x.len(), &mut rng);
        let dn = self.norm.dual_norm_unchecked(&dir);
        let radius = self.noise_bound * rng.random::<f64>() / dn;
        dir.iter_mut().for_each(|v| *v *= radius);
        dir
    }
}

impl<G: Operator> InexactOracle for NoisyOracle<G> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn evaluate(&self, x: &Point, _delta_c: f64) -> Result<DualVector> {
        let g = apply_checked(&self.op, x)?;
        if self.noise_bound == 0.0 {
            return Ok(g);
        }
        let e = self.noise(x);
        DualVector::new(g.iter().zip(e).map(|(a, b)| a + b).collect())
    }
    fn delta_u(&self) -> f64 {
        2.0 * self.noise_bound * self.diameter
    }
    fn exact(&self, x: &Point) -> Option<DualVector> {
        apply_checked(&self.op, x).ok()
    }
    fn declared_l(&self, delta_c: f64) -> Option<f64> {
        self.holder.map(|h| holder_l(h, delta_c))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn point_digest(seed: u64, x: &[f64]) -> u64 {
    x.iter()
        .fold(splitmix64(seed), |h, v| splitmix64(h ^ v.to_bits()))
}

/// A `(δ, L)`-oracle for a convex function: at every `y` a pair
/// `(f_δ(y), g_δ(y))` with
/// `f_δ(y) + ⟨g_δ(y), x − y⟩ ≤ f(x) ≤ f_δ(y) + ⟨g_δ(y), x − y⟩ + L/2‖x − y‖² + δ`.
pub trait DeltaLPair: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> (f64, Vec<f64>);
    /// The true (sub)gradient, when available.
    fn exact_grad(&self, _y: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// The gradient part of a `(δ, L)`-oracle viewed as a VI oracle with
/// `L(δ_c) ≡ L` and `δ_u = 3δ`.
#[derive(Clone)]
pub struct DeltaLOracle<F> {
    pair: F,
    delta: f64,
    l: f64,
    grad_error: Option<(f64, f64)>,
}

pub fn delta_l_oracle<F: DeltaLPair>(pair: F, delta: f64, l: f64) -> Result<DeltaLOracle<F>> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::contract(format!("delta must be non-negative, got {delta}")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::contract(format!("L must be positive, got {l}")));
    }
    Ok(DeltaLOracle {
        pair,
        delta,
        l,
        grad_error: None,
    })
}

impl<F: DeltaLPair> DeltaLOracle<F> {
    /// Declares `‖g_δ(y) − g(y)‖_* ≤ bound` on a set of diameter `diameter`,
    /// which yields the lower inequality with `δ_u ≥ bound·diameter`.
    pub fn with_gradient_error(mut self, bound: f64, diameter: f64) -> Result<Self> {
        if !(bound >= 0.0 && diameter >= 0.0 && bound.is_finite() && diameter.is_finite()) {
            return Err(Error::contract("gradient error bound and diameter must be non-negative"));
        }
        self.grad_error = Some((bound, diameter));
        Ok(self)
    }

    /// `f_δ(y)`.
    pub fn model_value(&self, y: &Point) -> f64 {
        self.pair.eval(y).0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl<F: DeltaLPair> InexactOracle for DeltaLOracle<F> {
    fn dim(&self) -> usize {
        self.pair.dim()
    }
    fn evaluate(&self, x: &Point, _delta_c: f64) -> Result<DualVector> {
        ensure_dim(self.pair.dim(), x.dim())?;
        DualVector::new(self.pair.eval(x).1).map_err(|_| Error::NonFinite("oracle value"))
    }
    fn delta_u(&self) -> f64 {
        let from_model = 3.0 * self.delta;
        match self.grad_error {
            Some((bound, diameter)) => from_model.max(bound * diameter),
            None => from_model,
        }
    }
    fn exact(&self, x: &Point) -> Option<DualVector> {
        self.pair.exact_grad(x).and_then(|g| DualVector::new(g).ok())
    }
    fn declared_l(&self, _delta_c: f64) -> Option<f64> {
        Some(self.l)
    }
}

/// Worst observed slack of the two oracle inequalities over random triples.
///
/// Positive `upper_excess` means `⟨g̃(y) − g̃(x), y − z⟩` exceeded
/// `L/2(‖y−x‖² + ‖y−z‖²) + δ_c + δ_u`; positive `lower_excess` means
/// `⟨g̃(y) − g(y), y − z⟩` fell below `−δ_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformanceReport {
    pub samples: usize,
    pub upper_excess: f64,
    pub lower_excess: f64,
}

impl ConformanceReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.upper_excess <= slack && self.lower_excess <= slack
    }
}

/// Samples `(x, y, z) ∈ Q³` and measures both oracle inequalities with the
/// given `L(δ_c)`. Needs [`InexactOracle::exact`] for the lower inequality.
pub fn check_conformance<O, R>(
    oracle: &O,
    set: &FeasibleSet,
    norm: &Norm,
    l: f64,
    delta_c: f64,
    samples: usize,
    rng: &mut R,
) -> Result<ConformanceReport>
where
    O: InexactOracle + ?Sized,
    R: Rng + ?Sized,
{
    ensure_dim(set.dim(), oracle.dim())?;
    norm.validate(set.dim())?;
    let du = oracle.delta_u();
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = set.sample(rng);
        let y = set.sample(rng);
        let z = set.sample(rng);
        let gx = oracle.evaluate(&x, delta_c)?;
        let gy = oracle.evaluate(&y, delta_c)?;
        let yz: Vec<f64> = y.iter().zip(z.iter()).map(|(a, b)| a - b).collect();
        let diff: Vec<f64> = gy.iter().zip(gx.iter()).map(|(a, b)| a - b).collect();
        let lhs = dot(&diff, &yz);
        let ryx = norm.dist(&y, &x);
        let ryz = norm.norm_unchecked(&yz);
        let rhs = l / 2.0 * (ryx * ryx + ryz * ryz) + delta_c + du;
        upper = upper.max(lhs - rhs);

        let g = oracle
            .exact(&y)
            .ok_or_else(|| Error::contract("conformance check needs the exact operator"))?;
        let err: Vec<f64> = gy.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
        lower = lower.max(-du - dot(&err, &yz));
    }
    Ok(ConformanceReport {
        samples,
        upper_excess: upper,
        lower_excess: lower,
    })
}
