//! End-to-end behaviour of the mirror-prox solver, its restarted variant and
//! the saddle reductions on problems with known structure.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vi_core::linalg::{dot, norm2, sub};
use vi_core::restart::restart_floor;
use vi_core::saddle::common_exponent;
use vi_core::{
    bregman, duality_gap_bound, exact_oracle, gap_certificate, holder_constant_of_blocks, holder_l,
    inner_iteration_bound, lagrangian_saddle, make_vi_operator, noisy_oracle, restart_solve, solve,
    support_max, BlockConstants, ConstrainedProblem, ConvexFunction, DualVector, FeasibleSet, FnOperator,
    HolderSpec, InexactOracle, MInit, Norm, NormMode, Operator, Point, ProxSetup, SaddleFunction, SaddleProblem,
    SolverOptions, StoppingRule, ToleranceBudget,
};

struct Fixture {
    name: &'static str,
    oracle: Box<dyn InexactOracle>,
    setup: ProxSetup,
    set: FeasibleSet,
    norm: Norm,
    holder: Option<HolderSpec>,
    eps: Vec<f64>,
}

fn boxed_exact<F>(dim: usize, f: F) -> Box<dyn InexactOracle>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    Box::new(exact_oracle(FnOperator::new(dim, f)))
}

fn exp_op(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let k = (-3.0f64).exp();
    (0..n).map(|i| (x[i] + x[(i + 1) % n] * k).exp()).collect()
}

/// `f(u, v) = u·v` on `[−1, 1]²`.
#[derive(Clone, Copy)]
struct Bilinear;
impl SaddleFunction for Bilinear {
    fn dims(&self) -> (usize, usize) {
        (1, 1)
    }
    fn grad_u(&self, _u: &[f64], v: &[f64]) -> Vec<f64> {
        vec![v[0]]
    }
    fn grad_v(&self, u: &[f64], _v: &[f64]) -> Vec<f64> {
        vec![u[0]]
    }
    fn value(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        Some(u[0] * v[0])
    }
}

fn interval() -> FeasibleSet {
    FeasibleSet::boxed(vec![-1.0], vec![1.0]).unwrap()
}

fn fixtures() -> Vec<Fixture> {
    let n = 20;
    let lin_a = [[2.0, 1.0, -0.5], [-1.0, 1.0, 0.3], [0.5, -0.3, 0.5]];
    let lin_b = [0.3, -0.2, 0.1];
    // ‖A‖₂ ≤ ‖A‖_F
    let lin_l = lin_a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let bilinear = SaddleProblem::new(Bilinear, interval(), interval()).unwrap();
    vec![
        Fixture {
            name: "identity",
            oracle: boxed_exact(3, |x| x.to_vec()),
            setup: ProxSetup::euclidean_at(Point::new(vec![0.6, -0.3, 0.2]).unwrap()),
            set: FeasibleSet::unit_ball(3),
            norm: Norm::Euclidean,
            holder: Some(HolderSpec::lipschitz(1.0).unwrap()),
            eps: vec![1e-1, 1e-2, 1e-3],
        },
        Fixture {
            name: "exp operator",
            oracle: boxed_exact(n, exp_op),
            setup: ProxSetup::euclidean_at(Point::filled(n, 1.0 / n as f64)),
            set: FeasibleSet::unit_ball(n),
            norm: Norm::Euclidean,
            holder: Some(HolderSpec::lipschitz(2.0 * 2f64.sqrt().exp()).unwrap()),
            eps: vec![1e-1, 1e-2, 1e-3, 1e-4],
        },
        Fixture {
            name: "normalized",
            oracle: boxed_exact(3, |x| {
                let c = [0.2, -0.1, 0.3];
                let d = sub(x, &c);
                let r = norm2(&d);
                if r == 0.0 {
                    vec![0.0; 3]
                } else {
                    d.iter().map(|v| v / r).collect()
                }
            }),
            setup: ProxSetup::euclidean(),
            set: FeasibleSet::unit_ball(3),
            norm: Norm::Euclidean,
            holder: Some(HolderSpec::new(0.0, 2.0).unwrap()),
            eps: vec![2e-1, 1e-1, 5e-2],
        },
        Fixture {
            name: "signed sqrt",
            oracle: boxed_exact(4, |x| x.iter().map(|v| (v - 0.1).signum() * (v - 0.1).abs().sqrt()).collect()),
            setup: ProxSetup::euclidean(),
            set: FeasibleSet::boxed(vec![-1.0; 4], vec![1.0; 4]).unwrap(),
            norm: Norm::Euclidean,
            holder: Some(HolderSpec::new(0.5, 2.0).unwrap()),
            eps: vec![1e-1, 1e-2],
        },
        Fixture {
            name: "bilinear saddle",
            oracle: Box::new(exact_oracle(make_vi_operator(bilinear))),
            setup: ProxSetup::euclidean_at(Point::new(vec![0.5, 0.5]).unwrap()),
            set: FeasibleSet::product(interval(), interval()),
            norm: Norm::ProductMax { split: 1 },
            holder: Some(
                HolderSpec::lipschitz(holder_constant_of_blocks(
                    BlockConstants::new(0.0, 1.0, 1.0, 0.0).unwrap(),
                    NormMode::MaxSum,
                ))
                .unwrap(),
            ),
            eps: vec![1e-1, 1e-2, 1e-3],
        },
        Fixture {
            name: "affine on simplex",
            oracle: boxed_exact(3, move |x| {
                (0..3).map(|i| dot(&lin_a[i], x) + lin_b[i]).collect()
            }),
            setup: ProxSetup::entropy(),
            set: FeasibleSet::simplex(3).unwrap(),
            norm: Norm::Euclidean,
            holder: Some(HolderSpec::lipschitz(lin_l).unwrap()),
            eps: vec![1e-1, 1e-2, 1e-3],
        },
    ]
}

#[test]
fn certificates_respect_the_rate_bound() {
    for fx in fixtures() {
        let radius = fx.set.bregman_radius_bound(&fx.setup).unwrap();
        for &eps in &fx.eps {
            let budget = ToleranceBudget::new(eps).unwrap();
            let opts = SolverOptions {
                norm: fx.norm,
                keep_history: true,
                ..Default::default()
            };
            let sol = solve(&*fx.oracle, &fx.setup, &fx.set, &budget, StoppingRule::CertifiedGap(radius), &opts)
                .unwrap();
            let cert = &sol.certificate;
            let s = cert.inverse_sum;
            let tag = format!("{} at ε = {eps}", fx.name);
            assert!(sol.converged, "{tag}");

            // gap ≤ V[z₀](u*)/S + ε/2 at the maximizing u*
            let neg = DualVector::new(cert.averaged_dual.iter().map(|v| -v).collect()).unwrap();
            let (_, u_star) = support_max(&fx.set, &neg).unwrap();
            let v_star = bregman(&fx.setup, &sol.start, &u_star).unwrap();
            assert!(v_star <= radius + 1e-12, "{tag}");
            assert!(cert.gap_value <= v_star / s + eps / 2.0 + 1e-9, "{tag}: {} vs {}", cert.gap_value, v_star / s);
            assert!(cert.gap_value <= sol.gap_bound(radius) + 1e-9, "{tag}");
            assert!(cert.gap_value <= eps + 1e-9, "{tag}");

            let again = gap_certificate(&sol.trace, &sol.dual_values, &fx.set).unwrap();
            assert!((again - cert.gap_value).abs() <= 1e-9 * (1.0 + cert.gap_value.abs()), "{tag}");

            // bookkeeping
            assert!(fx.set.contains(&cert.average, 1e-12), "{tag}");
            let sums = sol.trace.inverse_sums();
            assert!(sums.windows(2).all(|w| w[1] > w[0]), "{tag}");
            for r in sol.trace.records() {
                assert!(r.inner_trials >= 1);
                assert_eq!(r.oracle_calls, 2 * r.inner_trials);
            }
            let k = sol.iterations() as f64;
            assert!(s >= k / sol.trace.max_m().unwrap() - 1e-12, "{tag}");
            assert!((cert.weights.iter().sum::<f64>() - s).abs() <= 1e-9 * s);

            if let Some(spec) = fx.holder {
                let ceiling = holder_l(spec, eps / 2.0);
                let max_m = sol.trace.max_m().unwrap();
                assert!(max_m <= (2.0 * ceiling).max(2.0 * sol.m_init), "{tag}: max M = {max_m}");
                let calls = sol.oracle_calls() as f64;
                let budget_calls = 4.0 * k + 2.0 * (2.0 * ceiling).log2() - 2.0 * sol.m_init.log2();
                assert!(calls <= budget_calls, "{tag}: {calls} calls vs {budget_calls}");
            }
        }
    }
}

#[test]
fn exp_operator_ceiling_at_n_1000() {
    let n = 1000;
    let o = exact_oracle(FnOperator::new(n, exp_op));
    let set = FeasibleSet::unit_ball(n);
    let setup = ProxSetup::euclidean_at(Point::filled(n, 1.0 / n as f64));
    let radius = set.bregman_radius_bound(&setup).unwrap();
    let budget = ToleranceBudget::new(1e-2).unwrap();
    let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), &SolverOptions::default()).unwrap();
    assert!(sol.converged);
    assert!(sol.trace.max_m().unwrap() <= 2.0 * 2.0 * 2f64.sqrt().exp());
}

#[test]
fn certificate_dominates_sampled_merit() {
    let o = exact_oracle(FnOperator::new(3, |x: &[f64]| x.to_vec()));
    let set = FeasibleSet::unit_ball(3);
    let setup = ProxSetup::euclidean_at(Point::new(vec![0.5, 0.5, 0.5]).unwrap());
    let radius = set.bregman_radius_bound(&setup).unwrap();
    let budget = ToleranceBudget::new(1e-3).unwrap();
    let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), &SolverOptions::default()).unwrap();
    let w = &sol.certificate.average;
    assert!(norm2(w) < 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let u = set.sample(&mut rng);
        let merit = dot(&u, &sub(w, &u));
        assert!(merit <= sol.certificate.gap_value + 1e-12);
    }
}

#[test]
fn zero_operator_never_moves() {
    let o = exact_oracle(FnOperator::new(4, |_: &[f64]| vec![0.0; 4]));
    let set = FeasibleSet::unit_ball(4);
    let setup = ProxSetup::euclidean_at(Point::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap());
    let budget = ToleranceBudget::new(1e-2).unwrap();
    let opts = SolverOptions {
        keep_history: true,
        ..Default::default()
    };
    let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(2.0), &opts).unwrap();
    assert_eq!(sol.certificate.gap_value, 0.0);
    assert!(sol.certificate.iterates.iter().all(|w| w == &sol.start));
    assert!(sol.trace.records().iter().all(|r| r.inner_trials == 1));
}

#[test]
fn larger_search_factor_still_certifies() {
    let n = 50;
    let o = exact_oracle(FnOperator::new(n, exp_op));
    let set = FeasibleSet::unit_ball(n);
    let setup = ProxSetup::euclidean_at(Point::filled(n, 1.0 / n as f64));
    let radius = set.bregman_radius_bound(&setup).unwrap();
    for a in [1.5, 2.0, 4.0, 10.0] {
        let budget = ToleranceBudget::new(1e-3).unwrap();
        let opts = SolverOptions {
            search_factor: a,
            ..Default::default()
        };
        let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), &opts).unwrap();
        assert!(sol.converged);
        assert!(sol.certificate.gap_value <= 1e-3 + 1e-9, "a = {a}");
    }
}

#[test]
fn inexact_oracle_certificate_includes_its_error() {
    let set = FeasibleSet::unit_ball(5);
    let o = noisy_oracle(FnOperator::new(5, exp_op), 1e-3, set.diameter(), 5).unwrap();
    let setup = ProxSetup::euclidean_at(Point::filled(5, 0.2));
    let radius = set.bregman_radius_bound(&setup).unwrap();
    let budget = ToleranceBudget::new(1e-2).unwrap();
    let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), &SolverOptions::default()).unwrap();
    assert_eq!(sol.budget.delta_u, o.delta_u());
    assert!(sol.certificate.gap_value <= sol.gap_bound(radius) + 1e-9);
    // exact merit at the average against the true operator
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = &sol.certificate.average;
    for _ in 0..500 {
        let u = set.sample(&mut rng);
        let merit = dot(&exp_op(&u), &sub(w, &u));
        assert!(merit <= sol.gap_bound(radius) + 1e-9);
    }
}

fn shifted_identity(c: Vec<f64>) -> impl InexactOracle {
    let n = c.len();
    exact_oracle(FnOperator::new(n, move |x: &[f64]| sub(x, &c)))
}

#[test]
fn restart_contracts_towards_the_solution() {
    let c = vec![0.3, -0.5, 0.2, 0.1];
    let o = shifted_identity(c.clone());
    let set = FeasibleSet::unit_ball(4);
    let (eps, r0_sq) = (1e-4, 4.0);
    let budget = ToleranceBudget::new(eps).unwrap();
    for x0 in [vec![-0.5, 0.5, -0.5, 0.5], vec![0.0; 4], vec![0.0, 0.0, 0.0, -1.0]] {
        let x0 = Point::new(x0).unwrap();
        let out = restart_solve(&o, &set, 1.0, &budget, &x0, r0_sq, 1.0, &SolverOptions::default()).unwrap();
        for st in &out.history {
            let e = norm2(&sub(&st.x_p, &c)).powi(2);
            assert!(e <= r0_sq * 0.5f64.powi(st.p as i32) + eps / 2.0 + 1e-9, "p = {}: {e}", st.p);
            // the recursion's radius also dominates the error
            assert!(e <= st.r_sq + 1e-12);
        }
        assert!(norm2(&sub(&out.point, &c)).powi(2) <= eps);
        let bound = inner_iteration_bound(HolderSpec::lipschitz(1.0).unwrap(), 1.0, eps, 1.0, r0_sq);
        assert!(out.total_inner_iterations() as u64 <= bound, "{} > {bound}", out.total_inner_iterations());
    }
}

#[test]
fn restart_with_noise_reaches_the_noise_floor() {
    let c = vec![0.3, -0.5, 0.2];
    let cc = c.clone();
    let set = FeasibleSet::unit_ball(3);
    let o = noisy_oracle(FnOperator::new(3, move |x: &[f64]| sub(x, &cc)), 1e-4, set.diameter(), 3).unwrap();
    let eps = 1e-3;
    let budget = ToleranceBudget::new(eps).unwrap();
    let x0 = Point::zeros(3);
    let out = restart_solve(&o, &set, 1.0, &budget, &x0, 4.0, 1.0, &SolverOptions::default()).unwrap();
    let floor = restart_floor(eps, o.delta_u(), 0.0, 1.0);
    assert!(floor > eps / 4.0);
    for st in &out.history {
        let e = norm2(&sub(&st.x_p, &c)).powi(2);
        assert!(e <= 4.0 * 0.5f64.powi(st.p as i32) + eps / 2.0 + 2.0 * o.delta_u() + 1e-9);
    }
    assert!(norm2(&sub(&out.point, &c)).powi(2) <= eps + 2.0 * o.delta_u());
}

#[test]
fn bilinear_duality_gap_is_dominated() {
    let sp = SaddleProblem::new(Bilinear, interval(), interval()).unwrap();
    let set = sp.set();
    let norm = sp.norm();
    let op = make_vi_operator(sp);
    let o = exact_oracle(op.clone());
    let setup = ProxSetup::euclidean_at(Point::new(vec![0.7, -0.4]).unwrap());
    let radius = set.bregman_radius_bound(&setup).unwrap();
    let budget = ToleranceBudget::new(1e-2).unwrap();
    let opts = SolverOptions {
        norm,
        ..Default::default()
    };
    let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), &opts).unwrap();
    let bound = duality_gap_bound(&sol.certificate);
    assert!(bound <= 1e-2 + 1e-9);
    let (u_hat, v_hat) = op.problem().blocks(&sol.certificate.average);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let x = set.sample(&mut rng);
        let (u, v) = (&x[..1], &x[1..]);
        let gap = Bilinear.value(u_hat, v).unwrap() - Bilinear.value(u, v_hat).unwrap();
        assert!(gap <= bound + 1e-9);
    }
    // the exact gap of uv on the square is |û| + |v̂|
    assert!(u_hat[0].abs() + v_hat[0].abs() <= bound + 1e-9);
}

/// `½‖u‖² + uᵀBv − ½‖v‖² + s(‖u − a‖ − ‖v − b‖)`.
struct Mixed {
    b: Vec<Vec<f64>>,
    s: f64,
    a: Vec<f64>,
    c: Vec<f64>,
}

fn unit(d: Vec<f64>) -> Vec<f64> {
    let r = norm2(&d);
    if r == 0.0 {
        d
    } else {
        d.into_iter().map(|v| v / r).collect()
    }
}

impl SaddleFunction for Mixed {
    fn dims(&self) -> (usize, usize) {
        (self.b.len(), self.b[0].len())
    }
    fn grad_u(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let k = unit(sub(u, &self.a));
        (0..u.len()).map(|i| u[i] + dot(&self.b[i], v) + self.s * k[i]).collect()
    }
    fn grad_v(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let k = unit(sub(v, &self.c));
        (0..v.len())
            .map(|j| (0..u.len()).map(|i| self.b[i][j] * u[i]).sum::<f64>() - v[j] - self.s * k[j])
            .collect()
    }
    fn value(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        let bil: f64 = (0..u.len()).map(|i| u[i] * dot(&self.b[i], v)).sum();
        Some(
            0.5 * dot(u, u) + bil - 0.5 * dot(v, v) + self.s * (norm2(&sub(u, &self.a)) - norm2(&sub(v, &self.c))),
        )
    }
}

fn mixed(s: f64) -> Mixed {
    Mixed {
        b: vec![vec![0.5, -0.3], vec![0.2, 0.8], vec![-0.6, 0.1]],
        s,
        a: vec![0.1, 0.0, -0.2],
        c: vec![0.0, 0.3],
    }
}

#[test]
fn saddle_operator_is_monotone_and_holder() {
    let f = mixed(0.0);
    let fro = f.b.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let blocks = BlockConstants::new(1.0, fro, fro, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for mode in [NormMode::MaxSum, NormMode::L2Product] {
        let sp = SaddleProblem::new(mixed(0.0), FeasibleSet::unit_ball(3), FeasibleSet::unit_ball(2))
            .unwrap()
            .with_norm_mode(mode);
        let (set, norm) = (sp.set(), sp.norm());
        let op = make_vi_operator(sp);
        let l = holder_constant_of_blocks(blocks, mode);
        for _ in 0..10_000 {
            let x = set.sample(&mut rng);
            let y = set.sample(&mut rng);
            let dg = sub(&op.apply(&x), &op.apply(&y));
            assert!(dot(&dg, &sub(&x, &y)) >= -1e-10);
            assert!(norm.dual_norm(&dg).unwrap() <= l * norm.norm(&sub(&x, &y)).unwrap() + 1e-10);
        }
    }

    // with the kinks the operator is only bounded-variation; the diagonal
    // blocks are given directly in ν = 0 form (Lipschitz part times the
    // diameter plus the jump 2s of the kink) and the off-diagonal ones are
    // rescaled from ν = 1
    let sp = SaddleProblem::new(mixed(0.5), FeasibleSet::unit_ball(3), FeasibleSet::unit_ball(2)).unwrap();
    let (set, norm) = (sp.set(), sp.norm());
    let dq = set.diameter_in(&norm);
    let raw = BlockConstants::new(dq + 1.0, fro, fro, dq + 1.0).unwrap();
    let (nu0, scaled0) = common_exponent([0.0, 1.0, 1.0, 0.0], raw, dq).unwrap();
    assert_eq!(nu0, 0.0);
    assert_eq!(scaled0.l12, fro * dq);
    let l0 = holder_constant_of_blocks(scaled0, NormMode::MaxSum);
    let op = make_vi_operator(sp);
    for _ in 0..10_000 {
        let x = set.sample(&mut rng);
        let y = set.sample(&mut rng);
        let dg = sub(&op.apply(&x), &op.apply(&y));
        assert!(dot(&dg, &sub(&x, &y)) >= -1e-10);
        assert!(norm.dual_norm(&dg).unwrap() <= l0 + 1e-10);
    }
}

#[test]
fn mixed_smoothness_drives_the_line_search_ceiling() {
    let sp = SaddleProblem::new(mixed(0.5), FeasibleSet::unit_ball(3), FeasibleSet::unit_ball(2)).unwrap();
    let (set, norm) = (sp.set(), sp.norm());
    let dq = set.diameter_in(&norm);
    let fro = sp.function.b.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let (nu, scaled) = common_exponent([0.0, 1.0, 1.0, 0.0], BlockConstants::new(dq + 1.0, fro, fro, dq + 1.0).unwrap(), dq).unwrap();
    let spec = HolderSpec::new(nu, holder_constant_of_blocks(scaled, NormMode::MaxSum)).unwrap();
    let o = exact_oracle(make_vi_operator(sp));
    let setup = ProxSetup::euclidean();
    let radius = set.bregman_radius_bound(&setup).unwrap();
    for eps in [0.2, 0.1] {
        let budget = ToleranceBudget::new(eps).unwrap();
        let opts = SolverOptions {
            norm,
            ..Default::default()
        };
        let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), &opts).unwrap();
        assert!(sol.converged);
        let max_m = sol.trace.max_m().unwrap();
        assert!(max_m <= (2.0 * holder_l(spec, eps / 2.0)).max(2.0 * sol.m_init));
    }
}

struct Dist(Vec<f64>);
impl ConvexFunction for Dist {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        norm2(&sub(x, &self.0))
    }
    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        unit(sub(x, &self.0))
    }
}

#[test]
fn single_anchor_fermat_point_is_the_anchor() {
    let anchor = vec![0.3, -0.4];
    let cp = ConstrainedProblem::new(Arc::new(Dist(anchor.clone())), vec![])
        .unwrap()
        .with_lambda_radius(10.0)
        .unwrap();
    let sp = lagrangian_saddle(cp, FeasibleSet::unit_ball(2)).unwrap();
    let (set, norm) = (sp.set(), sp.norm());
    let o = exact_oracle(make_vi_operator(sp));
    let setup = ProxSetup::euclidean();
    let radius = set.bregman_radius_bound(&setup).unwrap();
    let eps = 1e-2;
    let budget = ToleranceBudget::new(eps).unwrap();
    let opts = SolverOptions {
        norm,
        m_init: MInit::Fixed(1.0),
        ..Default::default()
    };
    let sol = solve(&o, &setup, &set, &budget, StoppingRule::CertifiedGap(radius), &opts).unwrap();
    assert!(sol.converged);
    // f(ŵ) − f(x*) ≤ gap ≤ ε and f(ŵ) − f(x*) = ‖ŵ − a‖
    assert!(norm2(&sub(&sol.certificate.average, &anchor)) <= eps + 1e-9);
}
