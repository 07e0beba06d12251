//! Shifted-BDF2 implicit-explicit time stepping for the two-dimensional
//! Fisher-KPP equation
//!
//! ```text
//! u_t = D (u_xx + u_yy) + K f(u) + g(x, y, t)   on [a, b] × [c, d],
//! ```
//!
//! with Dirichlet boundary data, on uniform and tanh-graded time meshes.
//! Diffusion is treated implicitly and collocated at the shifted time
//! `t^{n+β}` (`β > 1`); the reaction term is extrapolated explicitly from two
//! history levels. Each step solves one symmetric positive definite system
//! `(σ I - κ L) u = r`.
//!
//! Module map:
//!
//! * [`timegrid`] uniform and graded meshes on `[0, T]`
//! * [`coeffs`] shifted BDF2 / IMEX weights (Vandermonde and Lagrange routes)
//! * [`spatial`] grid, five-point Laplacian, boundary lifting
//! * [`linsolve`] conjugate gradients and a dense oracle
//! * [`problems`] nonlinearities and the two benchmark problems
//! * [`stepper`] Dormand-Prince start-up and the BDF-IMEX march
//! * [`analysis`] error norms, observed orders, refinement sweeps
//! * [`cli`] configuration and the `kpp-imex` command line

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference values in tests keep every digit of the high-precision oracle
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod analysis;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod linsolve;
pub mod problems;
pub mod spatial;
pub mod stepper;
pub mod timegrid;

pub use analysis::{l2_error, linf_error, observed_order, spatial_sweep, temporal_sweep, ConvergenceTable, SweepSpec};
pub use coeffs::StepCoefficients;
pub use error::{Error, Result};
pub use linsolve::{cg_solve, direct_solve_small, ShiftedOperator, SolverConfig, SolverKind};
pub use problems::{example1, example2, Nonlinearity, ProblemSpec};
pub use spatial::{Field, Rectangle, SpaceGrid};
pub use stepper::{bdf_imex_step, integrate, rk_init, CoefficientPath, IntegrateOptions, RunOutcome};
pub use timegrid::{GridKind, TimeGrid};
