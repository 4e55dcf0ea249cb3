use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum ConifoldError {
    #[error("invalid link: {0}")]
    InvalidLink(String),

    #[error("spectrum file {path}: {reason}")]
    SpectrumFile { path: String, reason: String },

    #[error("exceptional weight range [{lo}, {hi}] does not cover {beta}; recompute over a wider range")]
    RangeTooSmall { lo: f64, hi: f64, beta: f64 },

    #[error("weight {beta} on end {end} is exceptional (within {tol} of {gamma})")]
    ExceptionalWeight { end: usize, beta: f64, gamma: f64, tol: f64 },

    #[error("weight ordering violated on end {end}: {detail}")]
    OrderingViolated { end: usize, detail: String },

    #[error("undefined exponent: {0}")]
    UndefinedExponent(String),

    #[error("models are not compatible: {0}")]
    Incompatible(String),

    #[error("gluing parameter rejected: {0}")]
    GluingParameter(String),

    #[error("warp profile is not positive at x = {x}")]
    NonPositiveProfile { x: f64 },

    #[error("weight conditions violated: {0}")]
    WeightConditions(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("at t = {t}: {source}")]
    AtParameter {
        t: f64,
        #[source]
        source: Box<ConifoldError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, ConifoldError>;

impl ConifoldError {
    /// Annotate an error with the gluing parameter it occurred at.
    pub fn at_t(self, t: f64) -> Self {
        ConifoldError::AtParameter { t, source: Box::new(self) }
    }
}
