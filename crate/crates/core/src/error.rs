use thiserror::Error;

/// Everything that can go wrong in the engine toolkit.
///
/// Variants are grouped by [`ErrorKind`] so front ends can map them onto
/// exit codes without matching every case.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PceError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state is under-truncated: population {tail:.3e} at level {n_max} exceeds tolerance {tol:.1e}")]
    UnderTruncated { n_max: usize, tail: f64, tol: f64 },

    #[error("field state violates {invariant}: residual {residual:.3e}")]
    InvalidState {
        invariant: &'static str,
        residual: f64,
    },

    #[error("maser threshold exceeded: gain coefficient {denominator:.6e} leaves no stable stationary photon number")]
    RunawayGain { denominator: f64 },

    #[error(
        "maser threshold violated: |c1|^2 + |c2|^2 - 2 p_e = {denominator:.6e} must be positive"
    )]
    ThresholdViolation { denominator: f64 },

    #[error("unphysical regime: 1 + zeta = {one_plus_zeta:.6e} must be positive")]
    UnphysicalZeta { one_plus_zeta: f64 },

    #[error("stationary state is not unique: {0}")]
    AmbiguousNullSpace(String),

    #[error("integrator step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Coarse classification of a [`PceError`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Input,
    /// The request leaves the physical regime of the model.
    Physics,
    /// A solver or integrator failed.
    Numerical,
}

impl PceError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            PceError::InvalidInput(_) => ErrorKind::Input,
            PceError::RunawayGain { .. }
            | PceError::ThresholdViolation { .. }
            | PceError::UnphysicalZeta { .. } => ErrorKind::Physics,
            PceError::UnderTruncated { .. }
            | PceError::InvalidState { .. }
            | PceError::AmbiguousNullSpace(_)
            | PceError::StepUnderflow { .. }
            | PceError::Numerical(_) => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, PceError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(PceError::InvalidInput(msg.into()))
}
