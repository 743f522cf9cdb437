use thiserror::Error;

/// Errors produced by circuit construction, parsing and numerics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("circuit too large: {n_qubits} qubits exceeds the dense limit of {max}")]
    TooLarge { n_qubits: usize, max: usize },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate `{name}` expects {expected} parameter(s), got {got}")]
    BadParamCount {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("gate `{name}` references qubit {qubit} outside [0, {n_qubits})")]
    QubitOutOfRange {
        name: String,
        qubit: usize,
        n_qubits: usize,
    },

    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },

    #[error("invalid block partition: {0}")]
    BadPartition(String),

    #[error("Lipschitz bound is zero; tolerable noise level is unbounded")]
    ZeroLipschitz,

    #[error("outside the exact worst-case regime: spread*eps_bar/2 = {0:.6} > pi/2")]
    OutOfRegime(f64),

    #[error("noise vector has length {got}, expected {expected} (one per noisy gate)")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operation requires a single-qubit circuit, got {0} qubits")]
    NotSingleQubit(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
