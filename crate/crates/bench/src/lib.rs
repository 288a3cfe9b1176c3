//! Benchmark instances and an experiment runner for the mirror-prox solvers.
//!
//! Three problem families are generated from seeded streams:
//!
//! * a non-potential, strongly monotone exponential operator on the unit ball;
//! * a nonsmooth bilinearly coupled saddle problem on two unit balls;
//! * the Lagrangian saddle problem of a Fermat–Torricelli–Steiner problem
//!   with weighted-ℓ₁ constraints.
//!
//! [`run_experiment`] solves every `(dimensions, ε, trial)` cell under the
//! certified-gap stopping rule and returns one [`ResultRow`] per cell.

pub mod error;
pub mod experiment;
pub mod fit;
pub mod problems;
pub mod seed;

pub use error::{Error, Result};
pub use experiment::{run_experiment, Dims, ExperimentConfig, ExperimentKind, Instance, ResultRow};
pub use fit::{epsilon_exponent, fit_line, log_accuracy_fit, LineFit};
pub use problems::{
    exp_operator_lipschitz, fts_start, gen_exp_operator, gen_fts, gen_nonsmooth_saddle, ExpOperator,
    ExpProblem, NonsmoothSaddle, DEFAULT_LAMBDA_RADIUS, FTS_X_RADIUS,
};
