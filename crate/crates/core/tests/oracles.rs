//! Oracle constructions against their defining inequalities.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vi_core::linalg::{dot, norm2, sub};
use vi_core::oracle::{check_conformance, holder_young_bound};
use vi_core::saddle::{saddle_delta_l_oracle, SaddleFunction};
use vi_core::{
    delta_l_oracle, exact_oracle, holder_l, noisy_oracle, DeltaLPair, FeasibleSet, FnOperator, HolderSpec,
    InexactOracle, Norm,
};

fn young_holds(a: f64, b: f64, c: f64, nu: f64, delta: f64) -> bool {
    a * b.powf(nu) * c <= holder_young_bound(a, b, c, nu, delta) + 1e-12
}

#[test]
fn holder_young_inequality_on_many_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    for i in 0..100_000 {
        // alternate between moderate and extreme magnitudes
        let scale = if i % 2 == 0 { 10.0 } else { 1e3 };
        let a = scale * rng.random::<f64>();
        let b = scale * rng.random::<f64>();
        let c = scale * rng.random::<f64>();
        let nu = rng.random::<f64>();
        let delta = 10f64.powf(rng.random_range(-6.0..2.0));
        if !young_holds(a, b, c, nu, delta) {
            violations += 1;
        }
    }
    for nu in [0.0, 1.0] {
        for _ in 0..1000 {
            let (a, b, c) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
            if !young_holds(a, b, c, nu, 0.01 + rng.random::<f64>()) {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn holder_young_inequality(a in 0.0..50.0f64, b in 0.0..50.0f64, c in 0.0..50.0f64, nu in 0.0..=1.0f64, delta in 1e-6..10.0f64) {
        prop_assert!(young_holds(a, b, c, nu, delta));
    }

    #[test]
    fn holder_l_decreases_in_delta_c(nu in 0.0..1.0f64, l in 0.01..100.0f64, d1 in 1e-6..1.0f64, f in 1.01..100.0f64) {
        let spec = HolderSpec::new(nu, l).unwrap();
        prop_assert!(holder_l(spec, d1 * f) < holder_l(spec, d1));
    }

    #[test]
    fn holder_l_is_constant_when_lipschitz(l in 0.01..100.0f64, d1 in 1e-6..10.0f64, d2 in 1e-6..10.0f64) {
        let spec = HolderSpec::lipschitz(l).unwrap();
        prop_assert!((holder_l(spec, d1) - holder_l(spec, d2)).abs() <= 1e-12 * l);
    }
}

fn exp_operator(n: usize) -> FnOperator<impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone> {
    let k = (-3.0f64).exp();
    FnOperator::new(n, move |x: &[f64]| (0..n).map(|i| (x[i] + x[(i + 1) % n] * k).exp()).collect())
}

/// `x/‖x‖` (zero at the origin): monotone, Hölder with `ν = 0`, `L₀ = 2`.
fn normalized(n: usize) -> FnOperator<impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone> {
    FnOperator::new(n, |x: &[f64]| {
        let r = norm2(x);
        if r == 0.0 {
            vec![0.0; x.len()]
        } else {
            x.iter().map(|v| v / r).collect()
        }
    })
}

/// `sign(x_i)√|x_i|`: Hölder with `ν = ½` and `L = (2√n)^{1/2}`.
fn signed_sqrt(n: usize) -> FnOperator<impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone> {
    FnOperator::new(n, |x: &[f64]| x.iter().map(|v| v.signum() * v.abs().sqrt()).collect())
}

fn assert_conforms<O: InexactOracle>(name: &str, oracle: &O, set: &FeasibleSet, l: f64, delta_c: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let report = check_conformance(oracle, set, &Norm::Euclidean, l, delta_c, 1000, &mut rng).unwrap();
    assert!(report.holds(1e-10), "{name}: {report:?}");
}

#[test]
fn exact_lipschitz_oracle_conforms() {
    let set = FeasibleSet::unit_ball(6);
    let l = 2.0 * 2f64.sqrt().exp();
    let o = exact_oracle(exp_operator(6)).with_holder(HolderSpec::lipschitz(l).unwrap());
    for dc in [1e-4, 1e-2, 1.0] {
        assert_eq!(o.declared_l(dc), Some(l));
        assert_conforms("exp operator", &o, &set, o.declared_l(dc).unwrap(), dc);
    }
}

#[test]
fn exact_holder_oracles_conform() {
    let set = FeasibleSet::unit_ball(4);
    let bv = exact_oracle(normalized(4)).with_holder(HolderSpec::new(0.0, 2.0).unwrap());
    let half = exact_oracle(signed_sqrt(4)).with_holder(HolderSpec::new(0.5, (2.0 * 2.0f64).sqrt()).unwrap());
    for dc in [1e-3, 1e-1] {
        assert_conforms("normalized", &bv, &set, bv.declared_l(dc).unwrap(), dc);
        assert_conforms("signed sqrt", &half, &set, half.declared_l(dc).unwrap(), dc);
    }
}

#[test]
fn noisy_oracles_conform() {
    let set = FeasibleSet::unit_ball(5);
    let d = set.diameter();
    let l = 2.0 * 2f64.sqrt().exp();
    let lip = noisy_oracle(exp_operator(5), 0.1, d, 11).unwrap();
    assert!((lip.delta_u() - 0.4).abs() < 1e-15);
    assert_conforms("noisy exp operator", &lip, &set, l, 1e-3);

    let hold = noisy_oracle(normalized(5), 0.05, d, 12)
        .unwrap()
        .with_holder(HolderSpec::new(0.0, 2.0).unwrap());
    assert_conforms("noisy normalized", &hold, &set, hold.declared_l(1e-2).unwrap(), 1e-2);
}

#[test]
fn noise_stays_within_its_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let set = FeasibleSet::unit_ball(7);
    for (norm, bound) in [(Norm::Euclidean, 0.3), (Norm::ProductMax { split: 3 }, 0.2)] {
        let o = noisy_oracle(exp_operator(7), bound, 2.0, 8).unwrap().with_norm(norm).unwrap();
        let mut largest: f64 = 0.0;
        for _ in 0..1000 {
            let x = set.sample(&mut rng);
            let e = sub(&o.evaluate(&x, 0.1).unwrap(), &o.exact(&x).unwrap());
            let size = norm.dual_norm(&e).unwrap();
            assert!(size <= bound * (1.0 + 1e-12));
            largest = largest.max(size);
        }
        // the radius is uniform on [0, bound]
        assert!(largest > 0.9 * bound);
    }
}

struct Quadratic(usize);

impl DeltaLPair for Quadratic {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, y: &[f64]) -> (f64, Vec<f64>) {
        (0.5 * dot(y, y), y.to_vec())
    }
    fn exact_grad(&self, y: &[f64]) -> Option<Vec<f64>> {
        Some(y.to_vec())
    }
}

/// `½‖y‖²` observed with gradient error at most `eta` on a set of diameter
/// `d`: a `(2·eta·d, 1)`-oracle with model value `f(y) − eta·d`.
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
        let e: Vec<f64> = (0..self.dim).map(|i| ((i as f64 + 1.0) * (y[0] * 7.0 + 1.0)).sin()).collect();
        let r = norm2(&e);
        let g = y.iter().zip(&e).map(|(yi, ei)| yi + self.eta * ei / r).collect();
        (0.5 * dot(y, y) - self.eta * self.d, g)
    }
    fn exact_grad(&self, y: &[f64]) -> Option<Vec<f64>> {
        Some(y.to_vec())
    }
}

#[test]
fn delta_l_oracles_conform() {
    let set = FeasibleSet::unit_ball(4);
    let exact = delta_l_oracle(Quadratic(4), 0.0, 1.0).unwrap();
    assert_eq!(exact.delta_u(), 0.0);
    assert_conforms("quadratic", &exact, &set, 1.0, 1e-3);

    let (eta, d) = (0.05, set.diameter());
    let pert = delta_l_oracle(PerturbedQuadratic { dim: 4, eta, d }, 2.0 * eta * d, 1.0)
        .unwrap()
        .with_gradient_error(eta, d)
        .unwrap();
    assert!((pert.delta_u() - 6.0 * eta * d).abs() < 1e-15);
    assert_conforms("perturbed quadratic", &pert, &set, 1.0, 1e-3);

    // the pair itself is a (δ, L)-oracle for ½‖·‖²
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inner = PerturbedQuadratic { dim: 4, eta, d };
    for _ in 0..1000 {
        let x = set.sample(&mut rng);
        let y = set.sample(&mut rng);
        let (fy, gy) = inner.eval(&y);
        let lin = fy + dot(&gy, &sub(&x, &y));
        let fx = 0.5 * dot(&x, &x);
        let r = norm2(&sub(&x, &y));
        assert!(lin <= fx + 1e-12);
        assert!(fx <= lin + 0.5 * r * r + pert.delta() + 1e-12);
    }
}

/// `½‖u‖² + uᵀBv − ½‖v‖²` with partial gradients perturbed by at most `eta`.
struct NoisyBilinear {
    b: Vec<Vec<f64>>,
    eta: f64,
}

impl NoisyBilinear {
    fn bump(&self, seed: f64, n: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..n).map(|i| (seed * 13.0 + i as f64).cos()).collect();
        let r = norm2(&e);
        e.into_iter().map(|v| self.eta * v / r).collect()
    }
}

impl SaddleFunction for NoisyBilinear {
    fn dims(&self) -> (usize, usize) {
        (self.b.len(), self.b[0].len())
    }
    fn grad_u(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let bump = self.bump(u[0] + v[0], u.len());
        (0..u.len()).map(|i| u[i] + dot(&self.b[i], v) + bump[i]).collect()
    }
    fn grad_v(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let bump = self.bump(u[0] - v[0], v.len());
        (0..v.len())
            .map(|j| (0..u.len()).map(|i| self.b[i][j] * u[i]).sum::<f64>() - v[j] + bump[j])
            .collect()
    }
    fn value(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        let bil: f64 = (0..u.len()).map(|i| u[i] * dot(&self.b[i], v)).sum();
        Some(0.5 * dot(u, u) + bil - 0.5 * dot(v, v))
    }
}

#[test]
fn saddle_delta_l_oracle_conforms() {
    let b = vec![vec![0.5, -0.3], vec![0.2, 0.8], vec![-0.6, 0.1]];
    let fro: f64 = b.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let eta = 0.02;
    let q = FeasibleSet::product(FeasibleSet::unit_ball(3), FeasibleSet::unit_ball(2));
    let d = q.diameter();
    // each block is a (2·eta·d, 1 + ‖B‖)-oracle of its partial function
    let delta = 2.0 * eta * d;
    let l = 1.0 + fro;
    let o = saddle_delta_l_oracle(Arc::new(NoisyBilinear { b, eta }), delta, l).unwrap();
    assert!((o.delta_u() - 6.0 * delta).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let x = q.sample(&mut rng);
        let y = q.sample(&mut rng);
        let z = q.sample(&mut rng);
        let gx = o.evaluate(&x, 0.0).unwrap();
        let gy = o.evaluate(&y, 0.0).unwrap();
        let lhs = dot(&sub(&gy, &gx), &sub(&y, &z));
        let (a, c) = (norm2(&sub(&y, &x)), norm2(&sub(&y, &z)));
        assert!(lhs <= l / 2.0 * (a * a + c * c) + o.delta_u() + 1e-10);

        let f = o.function();
        let (ux, vx) = x.split_at(3);
        let (uy, vy) = y.split_at(3);
        let model = f.value(uy, vx).unwrap() - f.value(ux, vy).unwrap();
        assert!(model <= dot(&gy, &sub(&y, &x)) + o.delta_u() + 1e-10);
        assert!(model <= dot(&gy, &sub(&y, &x)) + 2.0 * delta + 1e-10);
    }
}
