//! Alternating cyclic extrapolation for fixed-point iterations.
//!
//! Given a mapping `F: R^n -> R^n`, the solver accelerates the plain iteration
//! `x <- F(x)` by extrapolating from two or three successive mappings with a
//! secant-type step length, cycling the step through nested extrapolations and
//! alternating the extrapolation order between cycles. A gradient-descent
//! adapter turns any differentiable objective into such a mapping with an
//! adaptive descent step size, so the same machinery covers unconstrained and
//! box-constrained minimization, EM-style mappings, power iterations and
//! alternating projections.
//!
//! The crate ships:
//!
//! - [`extrapolation`]: the pure math — difference stacks, step lengths,
//!   cycled extrapolations;
//! - [`solver`]: the driver with order cycling, step constraints, bounds
//!   checking, best-iterate tracking and backtracking;
//! - [`descent`]: the gradient-descent mapping with adaptive step size;
//! - [`problems`]: a catalog of benchmark problems with deterministic
//!   seeded generators;
//! - [`bench`]: a harness running algorithm x problem x draw grids, an
//!   objective-discrepancy filter and performance-profile curves.
//!
//! The `acx` binary exposes `solve`, `bench` and `profile` subcommands; see
//! the README for usage.

pub mod bench;
pub mod cli;
pub mod descent;
pub mod extrapolation;
pub mod problems;
pub mod solver;

mod vecmath;

pub use extrapolation::{
    extrapolate, lemma1_residual, step_length, DegenerateStep, DifferenceStack, OrderSchedule,
    StepLength, StepLengthKind,
};
pub use solver::{
    apply_bounds, check_convergence, constrain_sigma, fixed_point_iterate, solve, AcxConfig,
    BoxBounds, ConfigError, Mapping, Norm, RunReport, RunStatus, TracePoint, TrackBest,
};
