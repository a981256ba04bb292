use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("non-positive pivot {pivot:e} at index {index}")]
    NonPositivePivot { index: usize, pivot: f64 },

    #[error("singular principal submatrix spanning {start}..={end}")]
    SingularSubmatrix { start: usize, end: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("zero asymptotic slope, power offset is undefined")]
    ZeroSlope,

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical routines, as opposed to bad input
    /// or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotPositiveDefinite
                | Error::NonPositivePivot { .. }
                | Error::SingularSubmatrix { .. }
                | Error::NonFinite { .. }
                | Error::ZeroSlope
                | Error::DegenerateCurve(_)
        )
    }
}
