use thiserror::Error;

/// Errors raised by the solver and its verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NskError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),
    #[error("invalid pressure model: {0}")]
    InvalidPressure(String),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("density approaches vacuum: min(1 + phi) = {min_density:.6e} <= rho_min = {rho_min:.3e}")]
    VacuumApproach { min_density: f64, rho_min: f64 },
    #[error("density {density:.6e} leaves the pressure model's smooth range (max {max:.6e})")]
    DensityOutOfRange { density: f64, max: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("blowup: norm {norm:.6e} exceeds {limit:.6e}")]
    Blowup { norm: f64, limit: f64 },
    #[error("amplitude guard violated: {got:.6e} > {limit:.6e}")]
    AmplitudeTooLarge { got: f64, limit: f64 },
    #[error("state has low-frequency content (relative mass {0:.3e}) below r1")]
    SupportViolation(f64),
    #[error("insufficient samples in fit window: {got} < {needed}")]
    InsufficientWindow { got: usize, needed: usize },
    #[error("invalid fit window: {0}")]
    InvalidWindow(String),
    #[error("invalid stepper configuration: {0}")]
    InvalidStepper(String),
    #[error("rk4 stability guard: dt * rate = {0:.3e} >= 0.5")]
    StabilityGuard(f64),
    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
}

pub type Result<T> = std::result::Result<T, NskError>;
