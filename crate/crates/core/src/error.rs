use thiserror::Error;

/// Errors raised by the toolkit. Validation failures map to CLI exit status 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {dim}")]
    NotSquare { row: usize, len: usize, dim: usize },

    #[error("matrix has zero dimension")]
    Empty,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max defect {defect:e} exceeds {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not a projection: defect {defect:e} exceeds {tol:e}")]
    NotProjection { defect: f64, tol: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("function is not finite at eigenvalue {eigenvalue}")]
    NonFiniteFunction { eigenvalue: f64 },

    #[error("spectral pole: z = {re}{im:+}i lies within {guard:e} of eigenvalue {eigenvalue}")]
    SpectralPole { re: f64, im: f64, eigenvalue: f64, guard: f64 },

    #[error("singular matrix in linear solve")]
    Singular,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid Borel set: {0}")]
    InvalidBorelSet(String),

    #[error("under-resolved mesh: {0}")]
    UnderResolvedMesh(String),

    #[error("window outside spectral band: [{lo}, {hi}] not inside [{band_lo}, {band_hi}]")]
    WindowOutsideBand { lo: f64, hi: f64, band_lo: f64, band_hi: f64 },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
