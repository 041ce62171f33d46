use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds tolerance {tol:e}")]
    NonHermitianInput { asymmetry: f64, tol: f64 },

    #[error("operator is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NegativeOperator { min_eigenvalue: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("basis is not orthonormal: defect {defect:e}")]
    NotOrthonormal { defect: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("noise parameter {0} outside [0, 1]")]
    NoiseOutOfRange(f64),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("normalizer matrix is numerically singular after {attempts} draws")]
    SingularNormalizer { attempts: usize },

    #[error("refusing to evaluate {cells} cells (cap {cap})")]
    ComplexityRefusal { cells: u128, cap: u128 },

    #[error("no gap interval for d = {0}")]
    NoGap(usize),

    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
