use thiserror::Error;

use crate::sv::Register;

/// Errors produced by the simulator and the training drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {total} qubits")]
    IndexOutOfRange { index: usize, total: usize },

    #[error("qubit {0} appears more than once among targets and controls")]
    DuplicateQubit(usize),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("matrix dimension {got} does not match {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("register {0} is not part of the layout")]
    UnknownRegister(Register),

    #[error("register {0} declared twice")]
    DuplicateRegister(Register),

    #[error("register {register} has width {got}, expected {expected}")]
    WidthMismatch {
        register: Register,
        expected: usize,
        got: usize,
    },

    #[error("states have different layouts")]
    LayoutMismatch,

    #[error("state norm {0} is not 1")]
    NotNormalized(f64),

    #[error("bitstring has length {got}, expected {expected}")]
    BitstringLength { expected: usize, got: usize },

    #[error("angle {angle} of parameter {param} is not a grid point")]
    OffGrid { param: usize, angle: f64 },

    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid LCU weights: {0}")]
    InvalidWeights(String),

    #[error("grid of {bits} bits exceeds the enumeration limit of {limit}")]
    GridTooLarge { bits: usize, limit: usize },

    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("threshold angle {0} outside the encoding branch range")]
    ThresholdOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
