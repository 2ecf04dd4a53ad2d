use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("lattice parameters of operands differ")]
    LatticeMismatch,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel has no paths")]
    EmptyChannel,

    #[error("estimation region {0}")]
    RegionOutOfBounds(String),

    #[error("linear system is singular (noise-free equalization of a rank-deficient channel)")]
    SingularSystem,

    #[error("bin ({0}, {1}) is not mapped by the allocation")]
    UnmappedBin(usize, usize),

    #[error("LDPC construction failed: {0}")]
    CodeConstruction(String),

    #[error("alist parse error: {0}")]
    Alist(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
