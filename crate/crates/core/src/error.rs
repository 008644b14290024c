use thiserror::Error;

/// Errors produced by the factorization engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaluError {
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),

    #[error("block index ({row}, {col}) outside a {block_rows}x{block_cols} block grid")]
    BlockOutOfRange {
        row: usize,
        col: usize,
        block_rows: usize,
        block_cols: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A pivot fell below the scaled singularity threshold.
    #[error("singular panel: no acceptable pivot in column {column}")]
    SingularPanel { column: usize },

    #[error("singular U factor: zero pivot at index {index}")]
    SingularU { index: usize },

    /// Fewer independent rows than required survived the tournament.
    #[error("structurally singular panel: {found} of {needed} independent pivot rows")]
    StructurallySingular { needed: usize, found: usize },

    #[error("singular matrix at panel step {step}, column {column}")]
    SingularMatrix { step: usize, column: usize },

    #[error("permutation entry {entry} out of range for {len} rows")]
    PermutationOutOfRange { entry: usize, len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error("trace: {0}")]
    Trace(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for CaluError {
    fn from(e: std::io::Error) -> Self {
        CaluError::Io(e.to_string())
    }
}

pub type Result<T, E = CaluError> = std::result::Result<T, E>;
