use thiserror::Error;

/// Signed mode index `(j1, j2, j3)`.
pub type ModeIndex = [i64; 3];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: String, found: String },

    #[error("field is not Hermitian-symmetric (deviation {deviation:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error(
        "zero-horizontal-wavenumber content {max_abs:.3e} exceeds gauge tolerance {tolerance:.3e} at modes {modes:?}"
    )]
    GaugeViolation {
        modes: Vec<ModeIndex>,
        max_abs: f64,
        tolerance: f64,
    },

    #[error("non-finite value in {what} at t = {time}")]
    NonFinite { what: String, time: f64 },

    #[error("CFL number {measured:.4} exceeds target {target:.4} at t = {time}")]
    Cfl { measured: f64, target: f64, time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    /// A result that can only arise from a bug, e.g. a positive integral of
    /// an identically zero field.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Blow-up and CFL failures, as opposed to usage errors.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::Cfl { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
