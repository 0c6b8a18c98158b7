//! Solvers for bilevel equilibrium problems over monotone bifunctions.
//!
//! A bilevel equilibrium problem asks for a point `x` in the solution set
//! `S_f` of a lower-level equilibrium problem (`f(x, y) >= 0` for all `y` in
//! the constraint set `K`) that additionally satisfies the upper-level
//! condition `g(x, y) >= 0` for all `y` in `S_f`. This crate provides:
//!
//! - an inertial proximal splitting solver and four baseline proximal
//!   schemes ([`algorithms`]),
//! - a resolvent engine that evaluates `J_lambda^f` by closed-form prox,
//!   linear solve, or an inner forward-backward iteration ([`resolvents`]),
//! - residuals, a Fitzpatrick-transform monitor for the geometric
//!   summability condition, and proof-level energy checks ([`diagnostics`]),
//! - a registry of benchmark problems with certified reference solutions
//!   ([`problems`]),
//! - a batch experiment runner with CSV traces and schedule expressions
//!   ([`cli`], also exposed through the `beq` binary).
//!
//! The `examples/` directory contains one runnable example per capability;
//! start with `cargo run --example paper_problem_ipsa`.

pub mod algorithms;
pub mod bifunctions;
pub mod cli;
pub mod convex;
pub mod diagnostics;
pub mod expr;
pub mod linalg;
pub mod problems;
pub mod resolvents;

mod ascent;

pub use linalg::{ConvexSet, Matrix, Vector};

/// Errors surfaced by any layer of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is numerically singular (pivot below threshold)")]
    SingularMatrix,

    #[error("invalid convex set: {0}")]
    InvalidSet(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("bifunction does not provide the `{0}` capability")]
    MissingCapability(&'static str),

    #[error("resolvent has no supported evaluation route: {0}")]
    UnsupportedStructure(String),

    #[error("inner solver exhausted its budget (best residual {residual:.3e})")]
    InnerBudgetExhausted {
        /// Best iterate found before the budget ran out.
        best: Vector,
        residual: f64,
    },

    #[error("solver run aborted: {message}")]
    RunAborted {
        message: String,
        /// Records produced before the abort.
        partial: Box<algorithms::Trace>,
    },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
