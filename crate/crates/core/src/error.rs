use thiserror::Error;

/// Errors surfaced by every layer of the library.
///
/// The CLI maps these onto process exit codes, so variants are grouped by
/// cause rather than by module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid field spec: {0}")]
    InvalidSpec(String),

    #[error("wrong family: {0}")]
    WrongFamily(String),

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("singular locus: {0}")]
    SingularLocus(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The step size fell below the representable resolution of `t`.
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64, last_state: Vec<f64> },

    #[error("non-finite right-hand side at t = {t}")]
    NonFiniteRhs { t: f64 },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("no bracket: {0}")]
    NoBracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
