use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. `code()` gives the stable
/// machine-readable name used by the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown covariate '{0}'")]
    UnknownCovariate(String),
    #[error("covariate '{0}' selected more than once")]
    DuplicateCovariate(String),
    #[error("column '{0}' is constant")]
    ConstantColumn(String),
    #[error("design matrix would have no columns")]
    EmptySelection,
    #[error("duplicate observation id '{0}'")]
    DuplicateId(String),
    #[error("invalid observation '{id}': {reason}")]
    InvalidObservation { id: String, reason: String },
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("row {row}: column '{column}' is missing or not numeric")]
    NonNumericCell { row: usize, column: String },
    #[error("row {row}: negative count")]
    NegativeCount { row: usize },
    #[error("row {row}: zero denominator in column '{column}'")]
    ZeroDenominator { row: usize, column: String },
    #[error("derived column name '{0}' collides with an existing column")]
    NameCollision(String),
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("objective is not finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },
    #[error("rank-deficient design; dependent columns: {}", .0.join(", "))]
    RankDeficientDesign(Vec<String>),
    #[error("quasi-complete separation suspected (|x'b| = {max_index:.1} at a non-converged optimum)")]
    SeparationSuspected { max_index: f64 },
    #[error("observed information matrix is singular or indefinite")]
    SingularInformation,
    #[error("zero standard error for '{0}'")]
    ZeroStandardError(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("k = {k} nearest neighbours requested but only {n} units")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownCovariate(_) => "UnknownCovariate",
            Error::DuplicateCovariate(_) => "DuplicateCovariate",
            Error::ConstantColumn(_) => "ConstantColumn",
            Error::EmptySelection => "EmptySelection",
            Error::DuplicateId(_) => "DuplicateId",
            Error::InvalidObservation { .. } => "InvalidObservation",
            Error::MissingColumn(_) => "MissingColumn",
            Error::NonNumericCell { .. } => "NonNumericCell",
            Error::NegativeCount { .. } => "NegativeCount",
            Error::ZeroDenominator { .. } => "ZeroDenominator",
            Error::NameCollision(_) => "NameCollision",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DomainError(_) => "DomainError",
            Error::DegenerateData(_) => "DegenerateData",
            Error::NonFiniteObjective { .. } => "NonFiniteObjective",
            Error::RankDeficientDesign(_) => "RankDeficientDesign",
            Error::SeparationSuspected { .. } => "SeparationSuspected",
            Error::SingularInformation => "SingularInformation",
            Error::ZeroStandardError(_) => "ZeroStandardError",
            Error::DegenerateGeometry(_) => "DegenerateGeometry",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
