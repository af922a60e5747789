//! Projected stochastic (sub)gradient methods for problems with hidden convexity.
//!
//! A problem `min F(x)` over a convex set `X` is hidden convex when `F = H ∘ c` for a
//! convex `H` on `U = c(X)` and an invertible map `c` with `‖c(x) − c(y)‖ ≥ μ_c‖x − y‖`.
//! The crate provides the subgradient method, projected SGD and projected SGD with
//! heavy-ball momentum together with step-size schedules, Moreau-envelope certificates,
//! a zoo of test problems, runtime diagnostics and an experiment harness.

pub mod algorithms;
pub mod diagnostics;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod harness;
pub(crate) mod linalg;
pub mod model;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::FeasibleSet;
pub use model::{ConstantBundle, HiddenConvexProblem, ImageGeometry, IterationRecord, ProblemModel, SmoothnessClass};
pub use rng::RandomSource;
