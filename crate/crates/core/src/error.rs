use thiserror::Error;

/// Errors raised by the engine. Variants carry the offending quantity so
/// callers can report how far outside the contract an input was.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows but {len} entries")]
    NotSquare { rows: usize, len: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: residual {residual:e} exceeds {tolerance:e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("vector norm {norm} differs from 1 by more than {tolerance:e}")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("invalid mixture weights: {0}")]
    WeightsInvalid(String),

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("operator is not a valid density operator: {0}")]
    NotDensity(String),

    #[error("reconstructed operator is not positive: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("negative variance {0:e}")]
    NegativeVariance(f64),

    #[error("negative probability {0:e}")]
    NegativeProbability(f64),

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operation requires a {expected} grid")]
    WrongBoundary { expected: &'static str },

    #[error("mode {mode} out of range for {points} grid points")]
    ModeOutOfRange { mode: i64, points: usize },

    #[error("invalid mode number {0}")]
    InvalidMode(i64),

    #[error("invalid spin 2j = {0}")]
    InvalidSpin(i64),

    #[error("packet width {sigma} too wide for ring of length {length}")]
    PacketTooWide { sigma: f64, length: f64 },

    #[error("packet width {sigma} not resolved by grid spacing {spacing}")]
    PacketUnresolved { sigma: f64, spacing: f64 },

    #[error("invalid time step: {0}")]
    InvalidStep(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("failed to write report: {0}")]
    ReportWriteFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
