use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A distribution failed one of the structural checks at construction.
    #[error("validation failed on `{clause}`: {detail}")]
    Validation { clause: String, detail: String },

    /// A hazard-rate construction violated one of its admissibility conditions.
    #[error("hazard condition ({condition}) `{name}` failed: {detail}")]
    HazardCondition {
        condition: char,
        name: &'static str,
        detail: String,
    },

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// A quadrature oracle could not reach the requested accuracy.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    OracleFailure { estimate: f64, error: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("sampler failed at uniform draw {uniform}: {detail}")]
    Sampler { uniform: f64, detail: String },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("model spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
