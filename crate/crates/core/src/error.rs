use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Sign-change isolation disagreed with the known root count. This is an
    /// arithmetic bug, never a user error.
    #[error("expected {expected} roots of E_{degree} in (-1, 0), isolated {found}")]
    RootCount {
        degree: usize,
        expected: usize,
        found: usize,
    },

    #[error("boundary-layer system is singular at {precision} bits")]
    SingularSystem { precision: usize },

    #[error("oracle assembly error: {0}")]
    OracleAssembly(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed golden file: {0}")]
    Golden(String),
}

pub type Result<T> = std::result::Result<T, Error>;
