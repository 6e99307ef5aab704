use thiserror::Error;

/// Failure modes shared by every computational module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("method unavailable: {0}")]
    MethodUnavailable(String),

    #[error("density matrix is not positive (det = {0:e})")]
    PositivityViolation(f64),

    #[error("grid too coarse: rate split residual {residual:e} exceeds {tolerance:e}")]
    GridTooCoarse { residual: f64, tolerance: f64 },

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("dispersion equation has no root below the band: {0}")]
    NoRoot(String),

    #[error("eigen-solve failure: {0}")]
    EigenFailure(String),
}

impl Error {
    /// Stable name of the variant, used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::RootNotBracketed(_) => "RootNotBracketed",
            Error::DomainError(_) => "DomainError",
            Error::MethodUnavailable(_) => "MethodUnavailable",
            Error::PositivityViolation(_) => "PositivityViolation",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::IntegratorFailure(_) => "IntegratorFailure",
            Error::NoRoot(_) => "NoRoot",
            Error::EigenFailure(_) => "EigenFailure",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
