//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the analysis modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A prior is degenerate (zero mass on a hypothesis that must be testable).
    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),

    /// A numeric parameter is outside its admissible range.
    #[error("parameter `{name}` = {value} out of range: {constraint}")]
    Parameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A distribution definition violates its invariants.
    #[error("invalid observation model: {0}")]
    InvalidModel(String),

    /// An observation falls outside the support of the null model, so the
    /// likelihood ratio is undefined.
    #[error("observation {value} has zero density under the null hypothesis")]
    Support { value: f64 },

    /// The two models of a hypothesis pair live on different observation spaces.
    #[error("hypothesis models do not share an observation space: {0}")]
    MismatchedSpaces(String),

    /// A batch of observations was empty where at least one sample is required.
    #[error("sample batch must contain at least one observation")]
    EmptyBatch,

    /// Exact enumeration would exceed the configured tuple cap.
    #[error("enumeration of {tuples} observation tuples exceeds the cap of {cap}")]
    EnumerationCap { tuples: u128, cap: u64 },

    /// The operation requires a finite observation alphabet.
    #[error("operation requires finite-alphabet models: {0}")]
    UnsupportedModel(&'static str),

    /// The Riccati iteration failed to reach the required residual.
    #[error("Riccati solver did not converge: residual {residual:.3e}")]
    Solver { residual: f64 },

    /// A simulated trajectory blew up.
    #[error("simulation diverged at t = {time:.3} s (state norm {norm:.3e})")]
    Divergence { time: f64, norm: f64 },

    /// A scenario is degenerate (e.g. indistinguishable hypotheses).
    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    /// The supply-chain graph is malformed or incomplete.
    #[error("supply-chain graph: {0}")]
    Graph(String),

    /// An I/O error while emitting artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
