use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, EmberError>;

#[derive(Debug, Error)]
pub enum EmberError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("integral symmetry violated: {0}")]
    Symmetry(String),

    #[error("overlap matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("overlap matrix is linearly dependent (condition number {condition:e})")]
    LinearDependence { condition: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { what: &'static str, iterations: usize, residual: f64 },

    #[error("degenerate orbitals: MP2 denominator {denominator:e} for ({i},{j})->({a},{b})")]
    DegenerateOrbitals { i: usize, j: usize, a: usize, b: usize, denominator: f64 },

    #[error("embedding inconsistency: impurity electron count {trace} is not an even integer")]
    EmbeddingInconsistency { trace: f64 },

    #[error("chemical potential secant stalled at mu = {mu} with N_err = {n_err:e}")]
    SecantStall { mu: f64, n_err: f64, history: Vec<(f64, f64)> },

    #[error("chemical potential diverged (mu = {mu})")]
    Divergence { mu: f64, history: Vec<(f64, f64)> },

    #[error("resource guard: {what} needs {requested}, limit is {limit}")]
    TooLarge { what: &'static str, requested: u128, limit: u128 },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("Part {part}: {context}: {source}")]
    Stage {
        part: &'static str,
        context: String,
        #[source]
        source: Box<EmberError>,
    },
}

/// Coarse failure category, used by the command line for exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Convergence,
    Resource,
    Other,
}

impl EmberError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EmberError::Io { path: path.into(), source }
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        EmberError::Parse { location: location.into(), message: message.into() }
    }

    pub fn in_part(self, part: &'static str, context: impl Into<String>) -> Self {
        EmberError::Stage { part, context: context.into(), source: Box::new(self) }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            EmberError::Stage { source, .. } => source.kind(),
            EmberError::Io { .. }
            | EmberError::Parse { .. }
            | EmberError::Invalid(_)
            | EmberError::IndexOutOfRange(_)
            | EmberError::Symmetry(_)
            | EmberError::NotPositiveDefinite { .. }
            | EmberError::LinearDependence { .. } => ErrorKind::Config,
            EmberError::NoConvergence { .. } | EmberError::SecantStall { .. } | EmberError::Divergence { .. } => {
                ErrorKind::Convergence
            }
            EmberError::TooLarge { .. } => ErrorKind::Resource,
            _ => ErrorKind::Other,
        }
    }
}
