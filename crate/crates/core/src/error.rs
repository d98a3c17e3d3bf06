use thiserror::Error;

/// Errors reported by state constructors, spectral models and measures.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m^dag| entry = {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    #[error("trace is {trace} but must be 1 within 1e-12")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("dimension {got} not supported here (expected {expected})")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter `{name}` = {value} is out of range: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("ensemble must contain at least {min} realization(s), got {got}")]
    EmptyEnsemble { min: usize, got: usize },

    #[error(
        "coherence must stay positive for the divisibility witness (f = {value:.3e} at t = {t} us)"
    )]
    NonpositiveCoherence { value: f64, t: f64 },

    #[error("series of {got} points is too short (need at least {min})")]
    SeriesTooShort { min: usize, got: usize },

    #[error("derivative input must be traceless (trace = {trace:.3e})")]
    NotTraceless { trace: f64 },

    #[error("eigendecomposition failed to converge")]
    EigenFailed,
}

pub type Result<T> = std::result::Result<T, Error>;
