//! Solvers for monotone variational inequalities (VIs) with inexact oracles.
//!
//! The problem is to find `x* ∈ Q` with `⟨g(x), x* − x⟩ ≤ 0` for all `x ∈ Q`,
//! where `Q` is a convex compact set and `g` a monotone operator that is only
//! available through an inexact oracle. The crate provides:
//!
//! * [`linalg`]: dense points, dual vectors, norm pairs, tolerance budgets
//!   and solve traces.
//! * [`prox`]: proximal setups (Euclidean, entropy), Bregman divergences,
//!   closed-form prox-mappings and support functions of feasible sets.
//! * [`oracle`]: the inexact-oracle abstraction and its standard
//!   constructions (exact, bounded noise, `(δ, L)`-oracle, Hölder).
//! * [`gmp`]: the adaptive generalized mirror-prox method with its
//!   computable gap certificate.
//! * [`restart`]: the restarted variant for strongly monotone operators.
//! * [`saddle`]: reductions from convex-concave saddle problems and
//!   Lagrangian saddle problems to VIs.
//!
//! All arithmetic is `f64`; vectors are dense.

pub mod error;
pub mod gmp;
pub mod linalg;
pub mod oracle;
pub mod prox;
pub mod restart;
pub mod saddle;

pub use error::{Error, Result};
pub use gmp::{
    average, check_condition, gap_certificate, solve, Certificate, DeltaCPolicy, MInit,
    Solution, SolverOptions, StoppingRule,
};
pub use linalg::{DualVector, IterationRecord, Norm, Point, SolveTrace, ToleranceBudget};
pub use oracle::{
    delta_l_oracle, exact_oracle, holder_l, noisy_oracle, DeltaLOracle, DeltaLPair, ExactOracle,
    FnOperator, HolderSpec, InexactOracle, NoisyOracle, Operator,
};
pub use prox::{bregman, omega_bound, prox_map, support_max, FeasibleSet, ProxKind, ProxSetup};
pub use restart::{inner_iteration_bound, restart_solve, RestartOutcome, RestartState};
pub use saddle::{
    duality_gap_bound, holder_constant_of_blocks, lagrangian_saddle, make_vi_operator,
    BlockConstants, ConstrainedProblem, ConvexFunction, NormMode, SaddleFunction, SaddleOperator,
    SaddleProblem,
};
