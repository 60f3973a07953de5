use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max |H - H†| = {0:e})")]
    NonHermitian(f64),

    #[error("imaginary resonance: E_L + 2 E_J cos F = {0:e} <= 0")]
    ImaginaryResonance(f64),

    #[error("invalid SQUID bias: cos F = {0:e} <= 0 (the SQUID reduces to a capacitor)")]
    InvalidBias(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wrong circuit topology: expected {expected}, got {got}")]
    WrongTopology { expected: &'static str, got: &'static str },

    #[error("steady state is not unique or the bordered system is singular: {0}")]
    SingularSystem(String),

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("probe response is nonlinear: halving the probe changed the gain matrix by {change:e} (relative); shrink the probe below {amplitude:e}")]
    Nonlinear { change: f64, amplitude: f64 },

    #[error("Fock truncation not converged: tail population {tail:e} at dim {dim}")]
    Truncation { dim: usize, tail: f64 },
}
