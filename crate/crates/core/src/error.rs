use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series have no overlapping years")]
    EmptyOverlap,

    #[error("window {start}-{end} is outside the series span {first}-{last} or empty")]
    WindowOutOfRange {
        start: i32,
        end: i32,
        first: i32,
        last: i32,
    },

    #[error("year {0} not found in series")]
    YearNotFound(i32),

    #[error("series `{0}` has no observed values")]
    EmptySeries(String),

    #[error("design matrix is ill-conditioned (condition number {condition:.3e} exceeds {threshold:.1e}){detail}")]
    IllConditioned {
        condition: f64,
        threshold: f64,
        detail: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown coefficient `{0}`")]
    UnknownCoefficient(String),

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("scenario `{scenario}` is incomplete: {detail}")]
    IncompleteScenario { scenario: String, detail: String },

    #[error("auxiliary series `{0}` is missing from the dataset")]
    MissingAuxiliarySeries(String),

    #[error("too few replicates: {got} < {min}")]
    TooFewReplicates { got: usize, min: usize },

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("data point outside the fitted GEV support: {0}")]
    SupportViolation(String),

    #[error("return period must be finite and > 1, got {0}")]
    InvalidPeriod(f64),

    #[error("counterfactual exceedance probability {0:e} is below 1e-300")]
    ZeroDenominator(f64),

    #[error("invalid residual sums of squares (restricted {restricted}, unrestricted {unrestricted})")]
    InvalidRss { restricted: f64, unrestricted: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("graph is not stationary (companion spectral radius {0:.4} >= 1)")]
    NonStationary(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate year {year}")]
    DuplicateYear { year: i32, line: usize },

    #[error("{path}: {source}")]
    Config {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    ConfigInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the config path of the element that produced it.
    pub fn at(self, path: impl Into<String>) -> Error {
        Error::Config {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::IllConditioned { .. }
            | Error::NonConvergence(_)
            | Error::SupportViolation(_)
            | Error::NonStationary(_)
            | Error::ZeroDenominator(_)
            | Error::InvalidRss { .. } => true,
            Error::Config { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
