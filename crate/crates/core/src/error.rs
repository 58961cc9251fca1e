use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Each variant carries enough context to produce a
/// single-line diagnostic; `code()` gives the stable machine-readable tag
/// used by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: no data rows")]
    EmptyInput,
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("duplicate key ({country}, {year}, {indicator})")]
    DuplicateKey {
        country: String,
        year: i32,
        indicator: String,
    },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("unknown country {0:?}")]
    UnknownCountry(String),
    #[error("unknown indicator {0:?}")]
    UnknownIndicator(String),
    #[error("insufficient data: need at least {required} values, got {available}")]
    InsufficientData { required: usize, available: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("degenerate range: all values equal")]
    DegenerateRange,
    #[error("bin count must be positive")]
    InvalidBinCount,
    #[error("no complete rows for the requested columns")]
    NoCompleteRows,

    #[error("non-positive input: power transform requires strictly positive values")]
    NonPositiveInput,
    #[error("degenerate data: zero variance")]
    DegenerateData,
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),
    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("too few observations: n={n} must exceed parameter count {params}")]
    TooFewObservations { n: usize, params: usize },
    #[error("duplicate column name {0:?}")]
    DuplicateColumnName(String),
    #[error("singular design matrix")]
    SingularDesign,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero total variance: response is constant")]
    ZeroTotalVariance,
    #[error("degenerate degrees of freedom: n={n}, k={k}")]
    DegenerateDegreesOfFreedom { n: usize, k: usize },
    #[error("sample too small: need at least {required} values, got {available}")]
    SampleTooSmall { required: usize, available: usize },
    #[error("all residuals are zero")]
    DegenerateResiduals,
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("standard error must be positive, got {0}")]
    NonPositiveStdErr(f64),

    #[error("too many components: requested {requested}, maximum {max}")]
    TooManyComponents { requested: usize, max: usize },
    #[error("component index {index} out of range (model has {count} components)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("need at least {required} components, model has {available}")]
    TooFewComponents { required: usize, available: usize },

    #[error("pool too small: {0}")]
    PoolTooSmall(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable error code for CLI stderr lines and scripting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInput => "E_EMPTY_INPUT",
            Error::MalformedRow { .. } => "E_MALFORMED_ROW",
            Error::DuplicateKey { .. } => "E_DUPLICATE_KEY",
            Error::MissingColumn(_) => "E_MISSING_COLUMN",
            Error::UnknownCountry(_) => "E_UNKNOWN_COUNTRY",
            Error::UnknownIndicator(_) => "E_UNKNOWN_INDICATOR",
            Error::InsufficientData { .. } => "E_INSUFFICIENT_DATA",
            Error::NonFinite => "E_NON_FINITE",
            Error::DegenerateRange => "E_DEGENERATE_RANGE",
            Error::InvalidBinCount => "E_INVALID_BIN_COUNT",
            Error::NoCompleteRows => "E_NO_COMPLETE_ROWS",
            Error::NonPositiveInput => "E_NON_POSITIVE_INPUT",
            Error::DegenerateData => "E_DEGENERATE_DATA",
            Error::ZeroVarianceColumn(_) => "E_ZERO_VARIANCE_COLUMN",
            Error::InvalidGrid(_) => "E_INVALID_GRID",
            Error::TooFewObservations { .. } => "E_TOO_FEW_OBSERVATIONS",
            Error::DuplicateColumnName(_) => "E_DUPLICATE_COLUMN",
            Error::SingularDesign => "E_SINGULAR_DESIGN",
            Error::DimensionMismatch { .. } => "E_DIMENSION_MISMATCH",
            Error::ZeroTotalVariance => "E_ZERO_TOTAL_VARIANCE",
            Error::DegenerateDegreesOfFreedom { .. } => "E_DEGENERATE_DF",
            Error::SampleTooSmall { .. } => "E_SAMPLE_TOO_SMALL",
            Error::DegenerateResiduals => "E_DEGENERATE_RESIDUALS",
            Error::InvalidAlpha(_) => "E_INVALID_ALPHA",
            Error::NonPositiveStdErr(_) => "E_NON_POSITIVE_STD_ERR",
            Error::TooManyComponents { .. } => "E_TOO_MANY_COMPONENTS",
            Error::IndexOutOfRange { .. } => "E_INDEX_OUT_OF_RANGE",
            Error::TooFewComponents { .. } => "E_TOO_FEW_COMPONENTS",
            Error::PoolTooSmall(_) => "E_POOL_TOO_SMALL",
            Error::InvalidSpec(_) => "E_INVALID_SPEC",
            Error::Csv(_) => "E_CSV",
        }
    }
}
