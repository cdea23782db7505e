use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("matrix shape {rows}x{cols} needs {expected} entries, got {found}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("modulus {0} is outside the supported range [2, 2^31)")]
    ModulusOutOfRange(u64),

    #[error("entry {value} at ({row}, {col}) is not a residue in {mode}")]
    Mode {
        row: usize,
        col: usize,
        value: i64,
        mode: String,
    },

    #[error("malformed witness: {0}")]
    MalformedWitness(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}
