//! Dense vectors in the primal and dual spaces, norm pairs and the
//! bookkeeping types shared by every solver.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A point of the primal space `E`.
///
/// Entries are finite and the dimension is positive; both are checked by
/// [`Point::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

/// An element of the dual space `E*` (operator values, prox gradients,
/// averaged dual vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector(Vec<f64>);

fn check_coords(coords: &[f64], what: &'static str) -> Result<()> {
    if coords.is_empty() {
        return Err(Error::Empty(what));
    }
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

macro_rules! dense_vector {
    ($ty:ident, $what:literal) => {
        impl $ty {
            pub fn new(coords: Vec<f64>) -> Result<Self> {
                check_coords(&coords, $what)?;
                Ok(Self(coords))
            }

            pub fn zeros(dim: usize) -> Self {
                assert!(dim > 0, concat!($what, " dimension must be positive"));
                Self(vec![0.0; dim])
            }

            pub fn filled(dim: usize, value: f64) -> Self {
                assert!(dim > 0, concat!($what, " dimension must be positive"));
                assert!(value.is_finite());
                Self(vec![value; dim])
            }

            /// Unit coordinate vector `e_index`.
            pub fn basis(dim: usize, index: usize) -> Self {
                let mut v = Self::zeros(dim);
                v.0[index] = 1.0;
                v
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }

            /// Wraps coordinates produced by internal arithmetic on valid
            /// inputs.
            pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
                debug_assert!(!coords.is_empty());
                Self(coords)
            }
        }

        impl Deref for $ty {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl TryFrom<Vec<f64>> for $ty {
            type Error = Error;

            fn try_from(coords: Vec<f64>) -> Result<Self> {
                Self::new(coords)
            }
        }
    };
}

dense_vector!(Point, "point");
dense_vector!(DualVector, "dual vector");

impl DualVector {
    /// The pairing `⟨self, x⟩`.
    pub fn pair(&self, x: &Point) -> Result<f64> {
        ensure_dim(self.dim(), x.dim())?;
        Ok(dot(self, x))
    }
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// A primal norm together with its dual.
///
/// `ProductMax` is the norm on `E₁ × E₂` used for saddle problems:
/// `‖(u, v)‖ = max{‖u‖₂, ‖v‖₂}` with dual `‖(z, w)‖_* = ‖z‖₂ + ‖w‖₂`.
/// The first `split` coordinates form the `u`-block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    Euclidean,
    ProductMax {
        split: usize,
    },
}

impl Norm {
    fn check_split(&self, dim: usize) -> Result<()> {
        match *self {
            Norm::Euclidean => Ok(()),
            Norm::ProductMax { split } if split >= 1 && split <= dim => Ok(()),
            Norm::ProductMax { split } => Err(Error::contract(format!(
                "product norm split {split} is outside 1..={dim}"
            ))),
        }
    }

    /// Primal norm of `x`.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.check_split(x.len())?;
        Ok(self.norm_unchecked(x))
    }

    /// Dual norm of `s`.
    pub fn dual_norm(&self, s: &[f64]) -> Result<f64> {
        self.check_split(s.len())?;
        Ok(self.dual_norm_unchecked(s))
    }

    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        match *self {
            Norm::Euclidean => norm2(x),
            Norm::ProductMax { split } => norm2(&x[..split]).max(norm2(&x[split..])),
        }
    }

    pub(crate) fn dual_norm_unchecked(&self, s: &[f64]) -> f64 {
        match *self {
            Norm::Euclidean => norm2(s),
            Norm::ProductMax { split } => norm2(&s[..split]) + norm2(&s[split..]),
        }
    }

    /// Primal norm of `a − b`.
    pub(crate) fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm_unchecked(&sub(a, b))
    }

    /// Validates the norm against a dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        self.check_split(dim)
    }
}

/// Accuracy target and the error levels the solver must tolerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceBudget {
    /// Target accuracy `ε > 0`.
    pub eps: f64,
    /// Uncontrolled oracle error `δ_u`.
    pub delta_u: f64,
    /// Uncontrolled prox-mapping error `δ_pu`.
    pub delta_pu: f64,
    /// Controlled prox-mapping error `δ_pc` requested from the prox solver.
    pub prox_tol: f64,
}

impl ToleranceBudget {
    /// Budget with no uncontrolled errors and `δ_pc = ε/8`.
    pub fn new(eps: f64) -> Result<Self> {
        Self {
            eps,
            delta_u: 0.0,
            delta_pu: 0.0,
            prox_tol: eps / 8.0,
        }
        .validated()
    }

    pub fn with_delta_u(mut self, delta_u: f64) -> Result<Self> {
        self.delta_u = delta_u;
        self.validated()
    }

    pub fn with_delta_pu(mut self, delta_pu: f64) -> Result<Self> {
        self.delta_pu = delta_pu;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::contract(format!("eps must be positive, got {}", self.eps)));
        }
        for (name, v) in [
            ("delta_u", self.delta_u),
            ("delta_pu", self.delta_pu),
            ("prox_tol", self.prox_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::contract(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(self)
    }
}

/// One accepted outer iteration of the mirror-prox method.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Accepted line-search constant `M_k`.
    pub m: f64,
    /// Number of inner trials `i_k` (at least one).
    pub inner_trials: usize,
    /// Oracle evaluations spent in this iteration, `2·i_k`.
    pub oracle_calls: usize,
    /// Extragradient point `w_k`, when the solver keeps iterates.
    pub iterate: Option<Point>,
}

/// Per-iteration history of a solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    records: Vec<IterationRecord>,
    inverse_sums: Vec<f64>,
}

impl SolveTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: IterationRecord) {
        debug_assert!(record.m > 0.0 && record.inner_trials >= 1);
        let prev = self.inverse_sum();
        self.inverse_sums.push(prev + record.m.recip());
        self.records.push(record);
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `S_k = Σ_{i<k} M_i⁻¹` after all recorded iterations.
    pub fn inverse_sum(&self) -> f64 {
        self.inverse_sums.last().copied().unwrap_or(0.0)
    }

    /// Cumulative `S_1, S_2, …`.
    pub fn inverse_sums(&self) -> &[f64] {
        &self.inverse_sums
    }

    pub fn total_oracle_calls(&self) -> usize {
        self.records.iter().map(|r| r.oracle_calls).sum()
    }

    pub fn total_inner_trials(&self) -> usize {
        self.records.iter().map(|r| r.inner_trials).sum()
    }

    pub fn max_m(&self) -> Option<f64> {
        self.records.iter().map(|r| r.m).reduce(f64::max)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.m.recip()).collect()
    }
}
