//! Stochastic solvers for semi-discrete optimal transport.
//!
//! The source measure `mu` is only accessed through samples; the target `nu`
//! is a finite weighted point cloud. The OT potential `g` is estimated by
//! projected stochastic (sub)gradient descent on the convex semi-dual
//!
//! ```text
//! H(g) = E[ -g^c(X) - <w, g> ],   g^c(x) = min_i c(x, y_i) - g_i
//! ```
//!
//! with coordinate clipping onto a hypercube known to contain a minimizer and
//! running (Polyak-Ruppert) averaging of the iterates. The OT map estimate
//! sends `x` to the support point of its Laguerre cell, and the OT cost is
//! reported as `-H`.
//!
//! Modules:
//!
//! - [`cost`]: ground costs, c-transform and Laguerre-cell assignment.
//! - [`measures`]: the discrete target and seedable source samplers.
//! - [`projection`]: the clipping box, its radius, and gauge projection.
//! - [`semidual`]: per-sample objective/subgradient and Monte-Carlo estimators.
//! - [`optim`]: projected SGD with averaging, plus Adagrad/Adam/S-Adam variants.
//! - [`oracle`]: exact 1-D ground truth (potentials, Hessian, map error).
//! - [`experiment`]: ground-truth generation, error metrics, rate fitting.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod experiment;
pub mod mc;
pub mod measures;
pub mod optim;
pub mod oracle;
pub mod projection;
pub mod rng;
pub mod semidual;
pub mod trace;

pub use cost::{CostFunction, CostKind};
pub use error::{Error, Result};
pub use measures::{DiscreteTarget, SourceMeasure};
pub use optim::{OptimizerConfig, SolverState, Variant};
pub use oracle::Oracle1D;
pub use projection::{Compact, ProjectionBox};
pub use rng::StreamKey;
pub use semidual::{Potential, Problem};
pub use trace::{Checkpoint, RunTrace};
