//! The three benchmark problems.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use vi_core::linalg::{norm2, sub};
use vi_core::saddle::{common_exponent, Lagrangian};
use vi_core::{
    lagrangian_saddle, BlockConstants, ConstrainedProblem, ConvexFunction, Error, FeasibleSet,
    NormMode, Operator, Point, Result, SaddleFunction, SaddleProblem,
};

use crate::seed::stream;

fn unit_or_zero(d: Vec<f64>) -> Vec<f64> {
    let n = norm2(&d);
    if n == 0.0 {
        d
    } else {
        d.into_iter().map(|v| v / n).collect()
    }
}

fn normals(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `[g(x)]_i = exp(x_i + x_{i+1}/e³)` with `x_{n+1} = x_1`. Monotone and
/// Lipschitz with constant `2e^{√2}` on the unit ball, but not a gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpOperator {
    n: usize,
}

impl Operator for ExpOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let k = (-3.0f64).exp();
        let n = x.len();
        (0..n).map(|i| (x[i] + k * x[(i + 1) % n]).exp()).collect()
    }
}

/// Lipschitz constant of [`ExpOperator`] on the unit ball.
pub fn exp_operator_lipschitz() -> f64 {
    2.0 * std::f64::consts::SQRT_2.exp()
}

#[derive(Debug, Clone)]
pub struct ExpProblem {
    pub operator: ExpOperator,
    pub set: FeasibleSet,
    /// `(1/n, …, 1/n)`.
    pub start: Point,
}

pub fn gen_exp_operator(n: usize) -> Result<ExpProblem> {
    if n < 2 {
        return Err(Error::Contract(format!("exp operator needs n ≥ 2, got {n}")));
    }
    Ok(ExpProblem {
        operator: ExpOperator { n },
        set: FeasibleSet::unit_ball(n),
        start: Point::filled(n, 1.0 / n as f64),
    })
}

/// `f(u, v) = ‖u − α‖ + ⟨Au − b, v⟩ − ‖v − β‖`, with subgradient `0` at the
/// kinks of the norms.
#[derive(Debug, Clone, PartialEq)]
pub struct NonsmoothSaddle {
    p: usize,
    q: usize,
    /// `q × p`, row-major.
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl NonsmoothSaddle {
    pub fn new(p: usize, q: usize, a: Vec<f64>, b: Vec<f64>, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Contract("p and q must be positive".into()));
        }
        if a.len() != p * q || b.len() != q || alpha.len() != p || beta.len() != q {
            return Err(Error::Contract(format!("data lengths do not match p = {p}, q = {q}")));
        }
        Ok(Self { p, q, a, b, alpha, beta })
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    fn a_times(&self, u: &[f64]) -> Vec<f64> {
        self.a.chunks_exact(self.p).map(|row| vi_core::linalg::dot(row, u)).collect()
    }

    fn a_transpose_times(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (row, &vj) in self.a.chunks_exact(self.p).zip(v) {
            vi_core::linalg::axpy(vj, row, &mut out);
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.a)
    }

    /// Block constants with the common exponent `ν = 0` on the unit balls:
    /// `2` for each norm term, `2‖A‖` for the bilinear coupling (Frobenius
    /// norm as the bound on `‖A‖₂`).
    pub fn block_constants(&self) -> Result<BlockConstants> {
        let fro = self.frobenius();
        let raw = BlockConstants::new(2.0, fro, fro, 2.0)?;
        let (_, blocks) = common_exponent([0.0, 1.0, 1.0, 0.0], raw, 2.0)?;
        Ok(blocks)
    }
}

impl SaddleFunction for NonsmoothSaddle {
    fn dims(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    fn grad_u(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut g = unit_or_zero(sub(u, &self.alpha));
        for (gi, ti) in g.iter_mut().zip(self.a_transpose_times(v)) {
            *gi += ti;
        }
        g
    }

    fn grad_v(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let s = unit_or_zero(sub(v, &self.beta));
        self.a_times(u)
            .iter()
            .zip(&self.b)
            .zip(s)
            .map(|((au, b), s)| au - b - s)
            .collect()
    }

    fn value(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        let au = self.a_times(u);
        let lin: f64 = au.iter().zip(&self.b).zip(v).map(|((x, b), y)| (x - b) * y).sum();
        Some(norm2(&sub(u, &self.alpha)) + lin - norm2(&sub(v, &self.beta)))
    }
}

/// Draws `A` (standard normal, row by row) and then `b` (uniform integers in
/// `[−10, 10]`) from the stream `seed`; `α_i = 0.1/√p`, `β_j = −0.1/√q`,
/// `Q₁`, `Q₂` unit balls, Euclidean product norm.
pub fn gen_nonsmooth_saddle(p: usize, q: usize, seed: u64) -> Result<SaddleProblem<NonsmoothSaddle>> {
    if p == 0 || q == 0 {
        return Err(Error::Contract(format!("nonsmooth saddle needs p, q ≥ 1, got ({p}, {q})")));
    }
    let mut rng = stream(seed);
    let a = normals(&mut rng, p * q);
    let b = (0..q).map(|_| rng.random_range(-10i32..=10) as f64).collect();
    let f = NonsmoothSaddle::new(
        p,
        q,
        a,
        b,
        vec![0.1 / (p as f64).sqrt(); p],
        vec![-0.1 / (q as f64).sqrt(); q],
    )?;
    Ok(SaddleProblem::new(f, FeasibleSet::unit_ball(p), FeasibleSet::unit_ball(q))?.with_norm_mode(NormMode::L2Product))
}

/// `Σ_k ‖x − A_k‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumOfDistances {
    pub anchors: Vec<Vec<f64>>,
}

impl ConvexFunction for SumOfDistances {
    fn dim(&self) -> usize {
        self.anchors.first().map_or(0, Vec::len)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.anchors.iter().map(|a| norm2(&sub(x, a))).sum()
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for a in &self.anchors {
            for (gi, si) in g.iter_mut().zip(unit_or_zero(sub(x, a))) {
                *gi += si;
            }
        }
        g
    }
}

/// `Σ_i α_i |x_i| − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAbs {
    pub alpha: Vec<f64>,
}

impl ConvexFunction for WeightedAbs {
    fn dim(&self) -> usize {
        self.alpha.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.alpha.iter().zip(x).map(|(a, v)| a * v.abs()).sum::<f64>() - 1.0
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(x)
            .map(|(a, v)| if *v == 0.0 { 0.0 } else { a * v.signum() })
            .collect()
    }
}

/// Radius of the ball `Q` holding `x` in the Fermat–Torricelli instances.
pub const FTS_X_RADIUS: f64 = 1.0;

/// Default radius of the multiplier ball.
pub const DEFAULT_LAMBDA_RADIUS: f64 = 10.0;

/// Draws the anchors (`N × n` standard normals) and then the constraint
/// weights (`m × n`, absolute values of standard normals) from the stream
/// `seed` and builds the Lagrangian saddle problem over
/// `{‖x‖ ≤ 1} × {λ ≥ 0, ‖λ‖ ≤ lambda_radius}` with the Euclidean norm.
pub fn gen_fts(n: usize, m: usize, big_n: usize, seed: u64, lambda_radius: f64) -> Result<SaddleProblem<Lagrangian>> {
    if n == 0 || big_n == 0 {
        return Err(Error::Contract(format!("Fermat–Torricelli needs n, N ≥ 1, got ({n}, {big_n})")));
    }
    let mut rng = stream(seed);
    let anchors = (0..big_n).map(|_| normals(&mut rng, n)).collect();
    let constraints: Vec<Arc<dyn ConvexFunction>> = (0..m)
        .map(|_| {
            let alpha = normals(&mut rng, n).into_iter().map(f64::abs).collect();
            Arc::new(WeightedAbs { alpha }) as Arc<dyn ConvexFunction>
        })
        .collect();
    let cp = ConstrainedProblem::new(Arc::new(SumOfDistances { anchors }), constraints)?
        .with_lambda_radius(lambda_radius)?
        .with_slater_point(Point::zeros(n))?;
    let q = FeasibleSet::ball(Point::zeros(n), FTS_X_RADIUS)?;
    Ok(lagrangian_saddle(cp, q)?.with_norm_mode(NormMode::L2Product))
}

/// `(1/√(n+m))·1 ∈ ℝ^{n+m}`.
pub fn fts_start(n: usize, m: usize) -> Point {
    Point::filled(n + m, 1.0 / ((n + m) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use vi_core::make_vi_operator;

    #[test]
    fn exp_operator_at_origin_is_all_ones() {
        let pb = gen_exp_operator(5).unwrap();
        assert_eq!(pb.operator.apply(&[0.0; 5]), vec![1.0; 5]);
        assert_eq!(pb.start.as_slice(), &[0.2; 5]);
        assert!(gen_exp_operator(1).is_err());
    }

    #[test]
    fn exp_operator_is_cyclic() {
        let g = gen_exp_operator(3).unwrap().operator;
        let k = (-3.0f64).exp();
        let v = g.apply(&[0.1, 0.2, 0.3]);
        assert_relative_eq!(v[2], (0.3 + 0.1 * k).exp());
        assert_relative_eq!(v[0], (0.1 + 0.2 * k).exp());
    }

    #[test]
    fn nonsmooth_operator_at_the_kinks() {
        let sp = gen_nonsmooth_saddle(4, 3, 9).unwrap();
        let f = &sp.function;
        let mut x = f.alpha().to_vec();
        x.extend_from_slice(f.beta());
        let g = make_vi_operator(sp.clone()).apply(&x);
        // u-block: Aᵀβ; v-block: −(Aα − b)
        for (i, gi) in g.iter().take(4).enumerate() {
            let atb: f64 = (0..3).map(|j| f.matrix()[j * 4 + i] * f.beta()[j]).sum();
            assert_relative_eq!(*gi, atb, epsilon = 1e-14);
        }
        for j in 0..3 {
            let aa: f64 = (0..4).map(|i| f.matrix()[j * 4 + i] * f.alpha()[i]).sum();
            assert_relative_eq!(g[4 + j], -(aa - f.b()[j]), epsilon = 1e-14);
        }
    }

    #[test]
    fn nonsmooth_data_ranges() {
        let sp = gen_nonsmooth_saddle(10, 200, 1).unwrap();
        let f = &sp.function;
        assert!(f.b().iter().all(|b| b.fract() == 0.0 && (-10.0..=10.0).contains(b)));
        assert!(f.b().contains(&10.0) && f.b().contains(&-10.0));
        assert_relative_eq!(f.alpha()[0], 0.1 / 10f64.sqrt());
        assert_relative_eq!(f.beta()[0], -0.1 / 200f64.sqrt());
        assert_eq!(sp.norm_mode, NormMode::L2Product);
    }

    #[test]
    fn fts_origin_is_strictly_feasible() {
        let sp = gen_fts(6, 4, 3, 2, 10.0).unwrap();
        let cp = sp.function.problem();
        for c in &cp.constraints {
            assert_eq!(c.value(&[0.0; 6]), -1.0);
        }
        assert_eq!(cp.slater_point.as_ref().unwrap().as_slice(), &[0.0; 6]);
        assert_eq!(sp.dim(), 10);
        assert!(sp.set().contains(&fts_start(6, 4), 1e-12));
    }

    #[test]
    fn weighted_abs_subgradient() {
        let w = WeightedAbs { alpha: vec![2.0, 3.0, 0.5] };
        assert_eq!(w.subgradient(&[-1.0, 0.0, 4.0]), vec![-2.0, 0.0, 0.5]);
        assert_relative_eq!(w.value(&[-1.0, 0.0, 4.0]), 3.0);
    }
}
