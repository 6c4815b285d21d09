use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("artificial viscosity {sigma} is below the slope bound {required}")]
    InvalidSigma { sigma: f64, required: f64 },

    #[error("discount function is not increasing at x = {x} (derivative {slope})")]
    MonotonicityViolation { x: f64, slope: f64 },

    #[error("linearized operator is singular at row {row}")]
    SingularLinearization { row: usize },

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("admissible slope set is empty at x = {x}")]
    EmptyInterval { x: f64 },

    #[error("admissible slope set is disconnected at x = {x}")]
    DisconnectedSublevel { x: f64 },

    #[error("construction leaves the unit circle: {0}")]
    DomainOverflow(String),

    #[error("root not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("negative radicand at x = {x}")]
    NegativeRadicand { x: f64 },

    #[error("momentum {p} does not belong to the requested double-well case")]
    CaseMismatch { p: f64 },

    #[error("candidate fails the subsolution test by {excess:.3e}")]
    NotASubsolution { excess: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that stem from numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::Config(_) | Error::Io(_))
    }
}
