use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count must be at least 1")]
    ZeroQubits,

    #[error("qubit count {got} outside supported range {min}..={max}")]
    QubitCountOutOfRange { got: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid Pauli index {0}, expected 0..=3")]
    InvalidPauliIndex(u8),

    #[error("invalid Pauli letter {0:?}, expected one of I, X, Y, Z")]
    InvalidPauliLetter(char),

    #[error("the all-identity string is not a valid measurement operator")]
    IdentityNotAllowed,

    #[error("duplicate Pauli string {0} in measurement set")]
    DuplicatePauli(String),

    #[error("requested {m} operators but only {max} exist")]
    SetSizeOutOfRange { m: usize, max: usize },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("state vector has zero norm")]
    ZeroNorm,

    #[error("parameter vector length {0} is not 2*2^n - 1 for any n >= 1")]
    BadParameterLength(usize),

    #[error("all-zero parameter vector cannot be normalized into a state")]
    ZeroParameterVector,

    #[error("|a_1| = {0:.3e} is too small to fix the global phase")]
    DegenerateParameterization(f64),

    #[error("Bloch vector norm {0} exceeds 1")]
    NonphysicalBlochVector(f64),

    #[error("value {value} for {what} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid activation: {0}")]
    InvalidActivation(String),

    #[error("EIT activation received negative input {0}; constrained signals must stay nonnegative")]
    NegativeActivationInput(f64),

    #[error("invalid training config: {0}")]
    InvalidConfig(String),

    #[error("training dataset is empty")]
    EmptyDataset,

    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("grating period must be nonzero")]
    ZeroGratingPeriod,

    #[error("spot list is empty")]
    NoSpots,

    #[error("duplicate spot position ({0}, {1})")]
    DuplicateSpot(usize, usize),

    #[error("spot position ({u}, {v}) outside {rows}x{cols} grid")]
    SpotOutOfBounds {
        u: usize,
        v: usize,
        rows: usize,
        cols: usize,
    },

    #[error("spot intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
