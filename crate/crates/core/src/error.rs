use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm squared {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("degenerate drive: sweep velocities must differ (v = u = {0})")]
    DegenerateDrive(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size too large: dt = {dt:e} produced norm drift {drift:e}")]
    StepTooLarge { dt: f64, drift: f64 },

    #[error("integration accuracy lost: dt = {dt:e} produced trace drift {drift:e}")]
    IntegrationAccuracy { dt: f64, drift: f64 },

    #[error("density matrix lost positivity at t = {time}: min eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { time: f64, min_eigenvalue: f64 },

    #[error("Rabi fit failed: {reason} (relative residual {residual:e})")]
    FitFailed { reason: String, residual: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
