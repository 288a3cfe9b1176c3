//! Proximal setups, feasible sets and the closed-form prox-mappings between
//! them.
//!
//! A prox-setup is a 1-strongly convex distance generating function `d`
//! with its gradient; the Bregman divergence is
//! `V[z](x) = d(x) − d(z) − ⟨∇d(z), x − z⟩` and the prox-mapping is
//! `argmin_{x ∈ Q} ⟨g, x⟩ + M·V[z](x)`.
//!
//! Supported pairs:
//!
//! | setup                | sets                                    |
//! |----------------------|-----------------------------------------|
//! | Euclidean `½‖x−c‖²`  | ball, box, simplex, nonneg ball, products |
//! | entropy              | simplex                                 |

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, ensure_dim, norm2, sub, DualVector, Norm, Point};

/// Floor applied to entropy iterates before taking logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxKind {
    /// `d(x) = ½‖x − c‖²`, 1-strongly convex for the Euclidean norm.
    EuclideanHalfSq,
    /// `d(x) = Σ xᵢ ln xᵢ + ln n` on the probability simplex.
    Entropy,
}

/// A prox-function, optionally recentered and rescaled as
/// `d_c,R(x) = R²·d((x − c)/R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxSetup {
    kind: ProxKind,
    center: Option<Point>,
    scale: f64,
}

impl ProxSetup {
    /// `½‖x‖²`.
    pub fn euclidean() -> Self {
        Self {
            kind: ProxKind::EuclideanHalfSq,
            center: None,
            scale: 1.0,
        }
    }

    /// `½‖x − center‖²`.
    pub fn euclidean_at(center: Point) -> Self {
        Self {
            kind: ProxKind::EuclideanHalfSq,
            center: Some(center),
            scale: 1.0,
        }
    }

    pub fn entropy() -> Self {
        Self {
            kind: ProxKind::Entropy,
            center: None,
            scale: 1.0,
        }
    }

    /// The restart prox-function `R²·d((x − center)/R)`.
    ///
    /// Only the Euclidean setup supports this: the entropy is tied to the
    /// simplex and has no meaningful shift.
    pub fn recentered(&self, center: Point, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::contract(format!("prox scale must be positive, got {scale}")));
        }
        match self.kind {
            ProxKind::EuclideanHalfSq => Ok(Self {
                kind: self.kind,
                center: Some(center),
                scale,
            }),
            ProxKind::Entropy => Err(Error::Configuration(
                "entropy prox-function cannot be recentered".into(),
            )),
        }
    }

    pub fn kind(&self) -> ProxKind {
        self.kind
    }

    pub fn center(&self) -> Option<&Point> {
        self.center.as_ref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn shifted(&self, x: &[f64]) -> Vec<f64> {
        match &self.center {
            Some(c) => x.iter().zip(c.iter()).map(|(a, b)| (a - b) / self.scale).collect(),
            None => x.iter().map(|a| a / self.scale).collect(),
        }
    }

    fn check_center(&self, dim: usize) -> Result<()> {
        match &self.center {
            Some(c) => ensure_dim(c.dim(), dim),
            None => Ok(()),
        }
    }

    /// `d(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_center(x.len())?;
        match self.kind {
            ProxKind::EuclideanHalfSq => {
                let y = self.shifted(x);
                Ok(self.scale * self.scale * 0.5 * dot(&y, &y))
            }
            ProxKind::Entropy => {
                if x.iter().any(|&v| v < 0.0) {
                    return Err(Error::Domain("entropy evaluated at a negative entry".into()));
                }
                let n = x.len() as f64;
                Ok(x.iter().map(|&v| xlogx(v)).sum::<f64>() + n.ln())
            }
        }
    }

    /// `∇d(x)`; for the entropy `x` must be strictly positive.
    pub fn grad(&self, x: &[f64]) -> Result<DualVector> {
        self.check_center(x.len())?;
        let g = match self.kind {
            ProxKind::EuclideanHalfSq => {
                let y = self.shifted(x);
                y.into_iter().map(|v| v * self.scale).collect()
            }
            ProxKind::Entropy => {
                ensure_positive(x)?;
                x.iter().map(|&v| 1.0 + v.max(ENTROPY_FLOOR).ln()).collect()
            }
        };
        Ok(DualVector::from_raw(g))
    }

    /// `z₀ = argmin_{x ∈ Q} d(x)`.
    pub fn anchor(&self, set: &FeasibleSet) -> Result<Point> {
        self.check_center(set.dim())?;
        match self.kind {
            ProxKind::EuclideanHalfSq => {
                let c = match &self.center {
                    Some(c) => c.to_vec(),
                    None => vec![0.0; set.dim()],
                };
                Ok(Point::from_raw(set.project(&c)))
            }
            ProxKind::Entropy => match set {
                FeasibleSet::Simplex { dim } => {
                    Ok(Point::from_raw(vec![1.0 / *dim as f64; *dim]))
                }
                _ => Err(incompatible(self.kind, set)),
            },
        }
    }
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.max(ENTROPY_FLOOR).ln()
    }
}

fn ensure_positive(z: &[f64]) -> Result<()> {
    if z.iter().all(|&v| v > 0.0) {
        Ok(())
    } else {
        Err(Error::Domain(
            "entropy prox-function is not differentiable at points with zero entries".into(),
        ))
    }
}

fn incompatible(kind: ProxKind, set: &FeasibleSet) -> Error {
    Error::Configuration(format!("no prox-mapping for {kind:?} on {}", set.describe()))
}

/// Bregman divergence `V[z](x)`.
pub fn bregman(setup: &ProxSetup, z: &Point, x: &Point) -> Result<f64> {
    ensure_dim(z.dim(), x.dim())?;
    setup.check_center(z.dim())?;
    match setup.kind {
        // The center and scale cancel: R²·½‖(x−c)/R‖² has the same
        // divergence as ½‖x‖².
        ProxKind::EuclideanHalfSq => {
            let d = sub(x, z);
            Ok(0.5 * dot(&d, &d))
        }
        ProxKind::Entropy => {
            ensure_positive(z)?;
            if x.iter().any(|&v| v < 0.0) {
                return Err(Error::Domain("entropy divergence at a negative entry".into()));
            }
            let mut v = 0.0;
            for (&xi, &zi) in x.iter().zip(z.iter()) {
                let zi = zi.max(ENTROPY_FLOOR);
                if xi > 0.0 {
                    v += xi * (xi.max(ENTROPY_FLOOR).ln() - zi.ln());
                }
                v += zi - xi;
            }
            Ok(v.max(0.0))
        }
    }
}

/// Solves `argmin_{x ∈ Q} ⟨g, x⟩ + M·V[z](x)`.
///
/// Every supported pair has a closed-form solution, so the returned point
/// meets the inexact prox condition with `tol = 0` up to rounding; `tol` is
/// accepted for interface compatibility with iterative backends.
pub fn prox_map(
    setup: &ProxSetup,
    set: &FeasibleSet,
    z: &Point,
    g: &DualVector,
    m: f64,
    tol: f64,
) -> Result<Point> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::contract(format!("prox constant M must be positive, got {m}")));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::contract(format!("prox tolerance must be non-negative, got {tol}")));
    }
    ensure_dim(set.dim(), z.dim())?;
    ensure_dim(z.dim(), g.dim())?;
    setup.check_center(z.dim())?;
    match setup.kind {
        ProxKind::EuclideanHalfSq => {
            let step: Vec<f64> = z.iter().zip(g.iter()).map(|(zi, gi)| zi - gi / m).collect();
            Ok(Point::from_raw(set.project(&step)))
        }
        ProxKind::Entropy => {
            if !matches!(set, FeasibleSet::Simplex { .. }) {
                return Err(incompatible(setup.kind, set));
            }
            ensure_positive(z)?;
            let logits: Vec<f64> = z
                .iter()
                .zip(g.iter())
                .map(|(zi, gi)| zi.max(ENTROPY_FLOOR).ln() - gi / m)
                .collect();
            let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
            let total: f64 = weights.iter().sum();
            Ok(Point::from_raw(
                weights.into_iter().map(|w| (w / total).max(ENTROPY_FLOOR)).collect(),
            ))
        }
    }
}

/// Worst violation of the prox optimality condition at a candidate `x`:
/// returns `min_{u ∈ Q} ⟨g + M(∇d(x) − ∇d(z)), u − x⟩`, which is `≥ −tol`
/// exactly when `x` is a `tol`-inexact prox-mapping.
pub fn prox_optimality(
    setup: &ProxSetup,
    set: &FeasibleSet,
    z: &Point,
    g: &DualVector,
    m: f64,
    x: &Point,
) -> Result<f64> {
    let gx = setup.grad(x)?;
    let gz = setup.grad(z)?;
    ensure_dim(g.dim(), x.dim())?;
    let h: Vec<f64> = (0..x.dim()).map(|i| g[i] + m * (gx[i] - gz[i])).collect();
    let neg: Vec<f64> = h.iter().map(|v| -v).collect();
    let (sup, _) = set.support(&neg);
    Ok(-sup - dot(&h, x))
}

/// `max_{u ∈ Q} ⟨s, u⟩` and a maximizer.
pub fn support_max(set: &FeasibleSet, s: &DualVector) -> Result<(f64, Point)> {
    ensure_dim(set.dim(), s.dim())?;
    let (value, arg) = set.support(s);
    Ok((value, Point::from_raw(arg)))
}

/// A constant `Ω` with `d(x) ≤ Ω/2` on the unit ball, as needed by the
/// restart scheme. For the entropy on the `n`-simplex this is the
/// conservative `2 ln n`.
pub fn omega_bound(setup: &ProxSetup, set: &FeasibleSet) -> Result<f64> {
    match setup.kind {
        ProxKind::EuclideanHalfSq => Ok(1.0),
        ProxKind::Entropy => match set {
            FeasibleSet::Simplex { dim } => Ok(2.0 * (*dim as f64).ln()),
            _ => Err(incompatible(setup.kind, set)),
        },
    }
}

/// A convex compact feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Ball { center: Point, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Simplex { dim: usize },
    /// `{x ≥ 0 : ‖x‖₂ ≤ radius}`; may be zero-dimensional as a product block.
    NonnegBall { dim: usize, radius: f64 },
    Product(Box<FeasibleSet>, Box<FeasibleSet>),
}

impl FeasibleSet {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::contract(format!("ball radius must be positive, got {radius}")));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn unit_ball(dim: usize) -> Self {
        FeasibleSet::Ball {
            center: Point::zeros(dim),
            radius: 1.0,
        }
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::Empty("box bounds"));
        }
        ensure_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !l.is_finite() || !h.is_finite() || l > h) {
            return Err(Error::contract("box bounds must be finite with lo <= hi"));
        }
        Ok(FeasibleSet::Box { lo, hi })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("simplex"));
        }
        Ok(FeasibleSet::Simplex { dim })
    }

    pub fn nonneg_ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::contract(format!("ball radius must be positive, got {radius}")));
        }
        Ok(FeasibleSet::NonnegBall { dim, radius })
    }

    pub fn product(first: FeasibleSet, second: FeasibleSet) -> Self {
        FeasibleSet::Product(Box::new(first), Box::new(second))
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Ball { center, .. } => center.dim(),
            FeasibleSet::Box { lo, .. } => lo.len(),
            FeasibleSet::Simplex { dim } | FeasibleSet::NonnegBall { dim, .. } => *dim,
            FeasibleSet::Product(a, b) => a.dim() + b.dim(),
        }
    }

    fn describe(&self) -> String {
        match self {
            FeasibleSet::Ball { .. } => "ball".into(),
            FeasibleSet::Box { .. } => "box".into(),
            FeasibleSet::Simplex { .. } => "simplex".into(),
            FeasibleSet::NonnegBall { .. } => "nonnegative ball".into(),
            FeasibleSet::Product(a, b) => format!("{} x {}", a.describe(), b.describe()),
        }
    }

    /// Membership with absolute slack.
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            FeasibleSet::Ball { center, radius } => norm2(&sub(x, center)) <= radius + slack,
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - slack && *v <= h + slack),
            FeasibleSet::Simplex { .. } => {
                x.iter().all(|&v| v >= -slack) && (x.iter().sum::<f64>() - 1.0).abs() <= slack
            }
            FeasibleSet::NonnegBall { radius, .. } => {
                x.iter().all(|&v| v >= -slack) && norm2(x) <= radius + slack
            }
            FeasibleSet::Product(a, b) => {
                let (xa, xb) = x.split_at(a.dim());
                a.contains(xa, slack) && b.contains(xb, slack)
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.dim());
        match self {
            FeasibleSet::Ball { center, radius } => {
                let d = sub(y, center);
                let r = norm2(&d);
                if r <= *radius {
                    y.to_vec()
                } else {
                    let t = radius / r;
                    center.iter().zip(&d).map(|(c, di)| c + t * di).collect()
                }
            }
            FeasibleSet::Box { lo, hi } => y
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect(),
            FeasibleSet::Simplex { .. } => project_simplex(y),
            FeasibleSet::NonnegBall { radius, .. } => {
                // Clamping to the orthant then scaling into the ball is the
                // exact projection onto their intersection.
                let mut p: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
                let r = norm2(&p);
                if r > *radius {
                    let t = radius / r;
                    p.iter_mut().for_each(|v| *v *= t);
                }
                p
            }
            FeasibleSet::Product(a, b) => {
                let (ya, yb) = y.split_at(a.dim());
                let mut out = a.project(ya);
                out.extend(b.project(yb));
                out
            }
        }
    }

    /// `(max_{u ∈ Q} ⟨s, u⟩, argmax)`; ties on simplex vertices go to the
    /// lowest index.
    pub(crate) fn support(&self, s: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(s.len(), self.dim());
        match self {
            FeasibleSet::Ball { center, radius } => {
                let ns = norm2(s);
                let base = dot(s, center);
                if ns == 0.0 {
                    return (base, center.to_vec());
                }
                let arg = center.iter().zip(s).map(|(c, si)| c + radius * si / ns).collect();
                (base + radius * ns, arg)
            }
            FeasibleSet::Box { lo, hi } => {
                let mut value = 0.0;
                let arg = s
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(si, (l, h))| {
                        let x = if *si > 0.0 { *h } else { *l };
                        value += si * x;
                        x
                    })
                    .collect();
                (value, arg)
            }
            FeasibleSet::Simplex { dim } => {
                let mut best = 0;
                for i in 1..*dim {
                    if s[i] > s[best] {
                        best = i;
                    }
                }
                let mut arg = vec![0.0; *dim];
                arg[best] = 1.0;
                (s[best], arg)
            }
            FeasibleSet::NonnegBall { dim, radius } => {
                let pos: Vec<f64> = s.iter().map(|v| v.max(0.0)).collect();
                let np = norm2(&pos);
                if np == 0.0 {
                    return (0.0, vec![0.0; *dim]);
                }
                (radius * np, pos.into_iter().map(|v| radius * v / np).collect())
            }
            FeasibleSet::Product(a, b) => {
                let (sa, sb) = s.split_at(a.dim());
                let (va, mut xa) = a.support(sa);
                let (vb, xb) = b.support(sb);
                xa.extend(xb);
                (va + vb, xa)
            }
        }
    }

    /// Euclidean diameter `max ‖x − y‖₂`.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Ball { radius, .. } => 2.0 * radius,
            FeasibleSet::Box { lo, hi } => norm2(&sub(hi, lo)),
            FeasibleSet::Simplex { dim } => {
                if *dim >= 2 {
                    std::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
            FeasibleSet::NonnegBall { dim, radius } => match dim {
                0 => 0.0,
                1 => *radius,
                _ => radius * std::f64::consts::SQRT_2,
            },
            FeasibleSet::Product(a, b) => a.diameter().hypot(b.diameter()),
        }
    }

    /// Diameter measured in `norm`; for the product-max norm this is the
    /// larger block diameter.
    pub fn diameter_in(&self, norm: &Norm) -> f64 {
        match (norm, self) {
            (Norm::ProductMax { split }, FeasibleSet::Product(a, b)) if a.dim() == *split => {
                a.diameter().max(b.diameter())
            }
            _ => self.diameter(),
        }
    }

    /// Upper bound on `max_{u ∈ Q} V[z₀](u)` with `z₀ = argmin_Q d`.
    pub fn bregman_radius_bound(&self, setup: &ProxSetup) -> Result<f64> {
        let z0 = setup.anchor(self)?;
        match setup.kind {
            ProxKind::EuclideanHalfSq => Ok(self.max_half_sq_dist(&z0)),
            ProxKind::Entropy => Ok((self.dim() as f64).ln()),
        }
    }

    /// `max_{u ∈ Q} ½‖u − z‖²`, exact except for the nonnegative ball.
    fn max_half_sq_dist(&self, z: &[f64]) -> f64 {
        match self {
            FeasibleSet::Ball { center, radius } => {
                let r = norm2(&sub(z, center)) + radius;
                0.5 * r * r
            }
            FeasibleSet::Box { lo, hi } => {
                0.5 * z
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(zi, (l, h))| (zi - l).powi(2).max((h - zi).powi(2)))
                    .sum::<f64>()
            }
            FeasibleSet::Simplex { dim } => {
                let zz = dot(z, z);
                (0..*dim)
                    .map(|i| 0.5 * (zz - 2.0 * z[i] + 1.0))
                    .fold(0.0, f64::max)
            }
            FeasibleSet::NonnegBall { radius, .. } => {
                let r = norm2(z) + radius;
                0.5 * r * r
            }
            FeasibleSet::Product(a, b) => {
                let (za, zb) = z.split_at(a.dim());
                a.max_half_sq_dist(za) + b.max_half_sq_dist(zb)
            }
        }
    }

    /// Draws a random member of the set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::from_raw(self.sample_raw(rng))
    }

    fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            FeasibleSet::Ball { center, radius } => {
                let dir = random_direction(center.dim(), rng);
                let r = radius * rng.random::<f64>().powf(1.0 / center.dim() as f64);
                center.iter().zip(dir).map(|(c, d)| c + r * d).collect()
            }
            FeasibleSet::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect(),
            FeasibleSet::Simplex { dim } => {
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                e.into_iter().map(|v| v / total).collect()
            }
            FeasibleSet::NonnegBall { dim, radius } => {
                if *dim == 0 {
                    return Vec::new();
                }
                let dir = random_direction(*dim, rng);
                let r = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
                dir.into_iter().map(|d| r * d.abs()).collect()
            }
            FeasibleSet::Product(a, b) => {
                let mut x = a.sample_raw(rng);
                x.extend(b.sample_raw(rng));
                x
            }
        }
    }
}

/// Uniform direction on the Euclidean unit sphere.
pub(crate) fn random_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn s(v: &[f64]) -> DualVector {
        DualVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bregman_examples() {
        let e = ProxSetup::euclidean();
        assert_eq!(bregman(&e, &p(&[0.0, 0.0]), &p(&[1.0, 0.0])).unwrap(), 0.5);
        assert_eq!(bregman(&e, &p(&[0.3, -2.0]), &p(&[0.3, -2.0])).unwrap(), 0.0);

        let h = ProxSetup::entropy();
        assert_eq!(bregman(&h, &p(&[0.5, 0.5]), &p(&[0.5, 0.5])).unwrap(), 0.0);
        // KL((1,0) || (½,½)) evaluated directly.
        let kl: f64 = 1.0 * (1.0f64 / 0.5).ln();
        assert_relative_eq!(
            bregman(&h, &p(&[0.5, 0.5]), &p(&[1.0, 0.0])).unwrap(),
            kl,
            epsilon = 1e-15
        );
        assert_relative_eq!(kl, std::f64::consts::LN_2);
    }

    #[test]
    fn entropy_bregman_rejects_zero_center() {
        let h = ProxSetup::entropy();
        assert!(matches!(
            bregman(&h, &p(&[1.0, 0.0]), &p(&[0.5, 0.5])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn prox_map_examples() {
        let e = ProxSetup::euclidean();
        let ball = FeasibleSet::unit_ball(2);
        let x = prox_map(&e, &ball, &p(&[0.0, 0.0]), &s(&[2.0, 0.0]), 2.0, 0.0).unwrap();
        assert_eq!(x.as_slice(), &[-1.0, 0.0]);

        let h = ProxSetup::entropy();
        let simplex = FeasibleSet::simplex(2).unwrap();
        let x = prox_map(&h, &simplex, &p(&[0.5, 0.5]), &s(&[0.0, 0.0]), 7.0, 0.0).unwrap();
        assert_relative_eq!(x[0], 0.5);
        assert_relative_eq!(x[1], 0.5);
        for m in [0.1, 1.0, 13.0] {
            let g = s(&[m * std::f64::consts::LN_2, 0.0]);
            let x = prox_map(&h, &simplex, &p(&[0.5, 0.5]), &g, m, 0.0).unwrap();
            assert_relative_eq!(x[0], 1.0 / 3.0, epsilon = 1e-15);
            assert_relative_eq!(x[1], 2.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn prox_map_rejects_bad_inputs() {
        let h = ProxSetup::entropy();
        let ball = FeasibleSet::unit_ball(2);
        assert!(matches!(
            prox_map(&h, &ball, &p(&[0.5, 0.5]), &s(&[0.0, 0.0]), 1.0, 0.0),
            Err(Error::Configuration(_))
        ));
        let e = ProxSetup::euclidean();
        assert!(prox_map(&e, &ball, &p(&[0.0, 0.0]), &s(&[0.0, 0.0]), 0.0, 0.0).is_err());
        assert!(prox_map(&e, &ball, &p(&[0.0, 0.0]), &s(&[0.0, 0.0]), 1.0, -1.0).is_err());
        assert!(matches!(
            prox_map(&e, &ball, &p(&[0.0, 0.0, 0.0]), &s(&[0.0, 0.0, 0.0]), 1.0, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn support_examples() {
        let ball = FeasibleSet::unit_ball(2);
        let (v, x) = support_max(&ball, &s(&[3.0, 4.0])).unwrap();
        assert_relative_eq!(v, 5.0);
        assert_relative_eq!(x[0], 0.6);
        assert_relative_eq!(x[1], 0.8);

        let simplex = FeasibleSet::simplex(3).unwrap();
        let (v, x) = support_max(&simplex, &s(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(x.as_slice(), &[0.0, 1.0, 0.0]);

        // ties resolve to the lowest index
        let (_, x) = support_max(&simplex, &s(&[2.0, 2.0, 1.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 0.0, 0.0]);

        for set in [
            ball,
            simplex,
            FeasibleSet::boxed(vec![-1.0; 3], vec![2.0; 3]).unwrap(),
            FeasibleSet::nonneg_ball(3, 2.0).unwrap(),
        ] {
            let zero = DualVector::zeros(set.dim());
            let (v, _) = support_max(&set, &zero).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn omega_examples() {
        let simplex2 = FeasibleSet::simplex(2).unwrap();
        assert_eq!(omega_bound(&ProxSetup::euclidean(), &simplex2).unwrap(), 1.0);
        assert_relative_eq!(
            omega_bound(&ProxSetup::entropy(), &simplex2).unwrap(),
            2.0 * 2f64.ln()
        );
        let simplex1 = FeasibleSet::simplex(1).unwrap();
        assert_eq!(omega_bound(&ProxSetup::entropy(), &simplex1).unwrap(), 0.0);
    }

    #[test]
    fn entropy_omega_matches_grid_maximum() {
        // max of d over the 2-simplex by a fine grid; Ω/2 must dominate it.
        let h = ProxSetup::entropy();
        let mut best: f64 = 0.0;
        for i in 0..=10_000 {
            let t = i as f64 / 10_000.0;
            best = best.max(h.value(&[t, 1.0 - t]).unwrap());
        }
        let omega = omega_bound(&h, &FeasibleSet::simplex(2).unwrap()).unwrap();
        assert_relative_eq!(best, omega / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn simplex_projection_lands_on_simplex() {
        let y = [0.3, -1.0, 2.5, 0.1];
        let x = project_simplex(&y);
        assert_relative_eq!(x.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert!(x.iter().all(|&v| v >= 0.0));
        assert_eq!(x, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn recentering_entropy_is_rejected() {
        let h = ProxSetup::entropy();
        assert!(matches!(
            h.recentered(p(&[0.5, 0.5]), 1.0),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn recentered_euclidean_has_min_at_center() {
        let e = ProxSetup::euclidean().recentered(p(&[0.2, -0.1]), 0.25).unwrap();
        assert_eq!(e.value(&[0.2, -0.1]).unwrap(), 0.0);
        let ball = FeasibleSet::unit_ball(2);
        assert_eq!(e.anchor(&ball).unwrap().as_slice(), &[0.2, -0.1]);
        // R²·½‖(x−c)/R‖² = ½‖x−c‖²
        assert_relative_eq!(e.value(&[1.2, -0.1]).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bregman_radius_bound_is_attained_on_ball() {
        let c = p(&[0.1, 0.0]);
        let setup = ProxSetup::euclidean_at(c.clone());
        let ball = FeasibleSet::unit_ball(2);
        let bound = ball.bregman_radius_bound(&setup).unwrap();
        assert_relative_eq!(bound, 0.5 * 1.1f64.powi(2));
        let far = p(&[-1.0, 0.0]);
        assert_relative_eq!(bregman(&setup, &c, &far).unwrap(), bound);
    }

    #[test]
    fn samples_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sets = [
            FeasibleSet::unit_ball(4),
            FeasibleSet::simplex(4).unwrap(),
            FeasibleSet::boxed(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap(),
            FeasibleSet::nonneg_ball(3, 5.0).unwrap(),
            FeasibleSet::product(FeasibleSet::unit_ball(2), FeasibleSet::nonneg_ball(2, 3.0).unwrap()),
        ];
        for set in &sets {
            for _ in 0..200 {
                assert!(set.contains(&set.sample(&mut rng), 1e-12));
            }
        }
    }
}
