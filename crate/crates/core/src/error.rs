use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("evaluation too close to a pole: {0}")]
    Pole(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("quadrature domain error: {0}")]
    QuadratureDomain(String),

    #[error("extrapolation inconclusive: {0}")]
    Inconclusive(String),

    #[error("free-boundary extraction failed: {0}")]
    Extraction(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("file format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
