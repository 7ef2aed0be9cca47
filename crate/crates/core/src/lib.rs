//! Finite element solver for coupled parabolic systems with nonlocal
//! diffusion coefficients on moving one-dimensional domains.
//!
//! The moving-boundary problem is mapped to the unit interval by the
//! change of variables `y = (x - alpha(t)) / gamma(t)`, which trades the
//! boundary motion for an advection term `b1(y,t) dv/dy` and a diffusion
//! scaling `b2(t) = 1/gamma(t)^2`. The transformed system is discretized
//! with continuous Lagrange elements of arbitrary degree in space and one
//! of three time integrators:
//!
//! * backward Euler with a fixed-point resolution of the nonlocal
//!   coefficient,
//! * Crank-Nicolson with the same fixed-point resolution, and
//! * a linearized Crank-Nicolson multistep scheme that extrapolates the
//!   nonlocal coefficient and needs one linear solve per step.
//!
//! The [`harness`] module measures errors against manufactured solutions
//! on the moving domain and fits convergence slopes; the [`cli`] module
//! drives single solves and refinement studies from the command line.

pub mod cli;
pub mod femspace;
pub mod geometry;
pub mod harness;
pub mod integrators;
pub mod problem;

use std::path::PathBuf;

pub use femspace::{BandedMatrix, CoefVector, FemSpace};
pub use geometry::BoundaryMotion;
pub use integrators::{FixedPointParams, Method, TimeGrid, Trajectory};
pub use problem::{ExactSolution, FixedProblem, MovingProblem};

/// Errors produced anywhere in the solver stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The domain width `gamma(t) = beta(t) - alpha(t)` is not positive.
    #[error("domain collapsed: gamma({t}) = {gamma} is not positive")]
    DomainCollapse { t: f64, gamma: f64 },

    /// A physical coordinate fell outside the current domain.
    #[error("x = {x} outside the domain [{lower}, {upper}] at t = {t}")]
    OutOfDomain {
        x: f64,
        t: f64,
        lower: f64,
        upper: f64,
    },

    /// Invalid finite element space construction.
    #[error("invalid finite element space: {0}")]
    InvalidSpace(String),

    /// A user-supplied function returned a non-finite value.
    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// A linear system was numerically singular.
    #[error("singular linear system: zero pivot at row {row}")]
    Singular { row: usize },

    /// A banded solve did not meet its residual contract.
    #[error("banded solve residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    /// The fixed-point iteration exhausted its iteration budget.
    #[error(
        "fixed-point iteration did not converge in {iterations} iterations \
         (last change {residual:.3e})"
    )]
    FixedPointDiverged { iterations: usize, residual: f64 },

    /// A time step failed; carries the 0-based index of the failing step.
    #[error("time step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// Invalid time grid parameters.
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// Slope estimation had fewer than two usable points.
    #[error("slope fit failed: {0}")]
    SlopeFit(String),

    /// Invalid convergence-study setup.
    #[error("invalid study: {0}")]
    Study(String),

    /// Configuration parse or validation error; names the offending key.
    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    /// File I/O failure, with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
