//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The eigensolver exhausted its sweep budget.
    #[error(
        "eigensolver failed to converge for sector M={m} \
         (gamma={gamma}, lambda={lambda}) after {sweeps} sweeps on index {index}"
    )]
    NonConvergence {
        m: usize,
        gamma: f64,
        lambda: f64,
        sweeps: usize,
        index: usize,
    },

    /// The requested point lies outside the equilibrium region, where the
    /// grand partition function does not converge.
    #[error(
        "grand partition function diverges at lambda={lambda}, mu={mu} \
         (gamma={gamma}): region is {region}"
    )]
    DivergentParameters {
        lambda: f64,
        mu: f64,
        gamma: f64,
        region: &'static str,
    },

    /// The sector sum hit its cap before the tail dropped below tolerance.
    #[error(
        "sector sum exceeded cap {cap} before reaching tolerance {tol:e} \
         (tail estimate {tail:e} at M={reached})"
    )]
    TruncationOverflow {
        cap: usize,
        tol: f64,
        tail: f64,
        reached: usize,
    },

    /// No divergence-curve point exists for the requested chemical potential.
    #[error("no divergence boundary for mu_d={mu_d}: requires mu_d < -lambda_c = {minus_lambda_c}")]
    NoBoundary { mu_d: f64, minus_lambda_c: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
