use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dag| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix size overflows usize ({rows} x {cols})")]
    SizeOverflow { rows: usize, cols: usize },

    #[error("Hilbert space dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver failed to converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("dressed level {level} has ill-defined parity (<P> = {expectation})")]
    ParityMixing { level: usize, expectation: f64 },

    #[error("integrator step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {max_steps} steps before t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("resonance condition not satisfied: {0}")]
    Resonance(String),

    #[error("drive calibration failed: best P(|2,+>) = {population} < {threshold}")]
    Calibration { population: f64, threshold: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
