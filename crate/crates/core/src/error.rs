use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not normal (residual {residual:.3e})")]
    NotNormal { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("parameter vector has length {found}, ansatz expects {expected}")]
    ParamLength { expected: usize, found: usize },

    #[error("operation not supported for problem kind {0}")]
    UnsupportedKind(&'static str),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable tag used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension_mismatch",
            Error::NotSquare { .. } => "not_square",
            Error::NonFinite => "non_finite",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotNormal { .. } => "not_normal",
            Error::InvalidDensity(_) => "invalid_density",
            Error::InvalidCircuit(_) => "invalid_circuit",
            Error::ParamLength { .. } => "param_length",
            Error::UnsupportedKind(_) => "unsupported_kind",
            Error::Decomposition(_) => "decomposition_failed",
            Error::Config(_) => "invalid_config",
            Error::Parse { .. } => "parse_error",
            Error::Io { .. } => "io_error",
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
