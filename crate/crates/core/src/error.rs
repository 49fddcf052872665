use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("Kraus operators are not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error(
        "subchannels have unequal Kraus counts {counts:?}; pad them explicitly with \
         `pad_kraus_to` (or the `--pad` flag) before building"
    )]
    UnequalKrausCounts { counts: Vec<usize> },

    #[error("off-block Kraus entry in operator {kraus} between input block {input} and output block {output}")]
    NotBlockStructured {
        kraus: usize,
        input: usize,
        output: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("no superadditivity window: closed-form bound {q_upper} leaves no lambda >= 1/2")]
    NoSuperadditivityWindow { q_upper: f64 },

    #[error("verdict does not qualify for the single-letter formula")]
    NotQualifying,

    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
