use thiserror::Error;

/// Errors raised by the notch solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NotchError {
    #[error("{field} = {value} is out of range (allowed: {allowed})")]
    OutOfRange { field: &'static str, value: f64, allowed: &'static str },

    #[error("basis member {member} is identically zero at p = {p}")]
    DegenerateBasis { member: &'static str, p: f64 },

    #[error("no singular value below {tol:e} (smallest relative value {smallest:e}); p is not an eigenvalue")]
    EmptyNullSpace { tol: f64, smallest: f64 },

    #[error("no root of the characteristic function in ({p_min}, {p_max}]")]
    NoRootFound { p_min: f64, p_max: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("expected {expected} amplitudes, got {got}")]
    AmplitudeCount { expected: usize, got: usize },

    #[error("quadrature ({quadrature:e}) and antiderivative ({exact:e}) disagree for {what}")]
    QuadratureDisagreement { what: &'static str, quadrature: f64, exact: f64 },

    #[error("energy integral diverges: W has a term r^{exponent} (needs exponent > -2)")]
    DivergentEnergy { exponent: f64 },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, NotchError>;
