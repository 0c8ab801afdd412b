use thiserror::Error;

/// Errors raised by the algebraic and numeric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix singular to tolerance: {0}")]
    Singular(String),
    #[error("eigenvalue iteration did not converge (ill-conditioned input?)")]
    NoConvergence,
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("linear resonance at pole {pole}: eigenvalues {a} and {b} differ by a nonzero integer")]
    LinearResonance { pole: usize, a: String, b: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
