use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {index}: signed volume {volume:e}")]
    DegenerateElement { index: usize, volume: f64 },

    #[error("invalid coefficient field: {0}")]
    InvalidCoefficient(String),

    #[error("no free degrees of freedom")]
    EmptyDofSet,

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("matrix is not symmetric positive definite (pivot {pivot} = {value:e})")]
    NotSpd { pivot: usize, value: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("preconditioner is not positive definite: <Bz, r> = {0:e}")]
    IndefinitePreconditioner(f64),

    #[error("mismatched meshes: {0}")]
    MeshMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem size {size} exceeds limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("variational identity violated on level {level}: relative error {error:e}")]
    GalerkinMismatch { level: usize, error: f64 },

    #[error("matrix market parse error on line {line}: {msg}")]
    MatrixMarket { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
