use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..=24")]
    QubitCount(usize),

    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("duplicate qubit index {0}")]
    DuplicateQubit(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown architecture descriptor `{given}` (valid: {valid})")]
    UnknownArchitecture { given: String, valid: String },

    #[error("feature value {value} at position {index} outside [0, 1]")]
    FeatureRange { index: usize, value: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("bad IDX magic number {found:#010x}")]
    IdxMagic { found: u32 },

    #[error("IDX payload truncated: expected {expected} bytes, file has {actual} (first missing byte at offset {actual})")]
    IdxTruncated { expected: usize, actual: usize },

    #[error("IDX payload has {extra} trailing bytes after offset {expected}")]
    IdxTrailing { expected: usize, extra: usize },

    #[error("label {value} at offset {offset} outside 0..=9")]
    IdxLabel { offset: usize, value: u8 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("VQE failed at delta = {delta}: {reason}")]
    Vqe { delta: f64, reason: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(&'static str),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("corrupted file: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
