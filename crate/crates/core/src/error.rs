use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("emitters {i} and {j} are {distance:e} lambda apart; the Green's tensor is singular")]
    Singularity { i: usize, j: usize, distance: f64 },

    #[error(
        "register of {n} emitters (dimension {dim}) exceeds the {what} capacity of {limit} emitters"
    )]
    Capacity {
        n: usize,
        limit: usize,
        dim: usize,
        what: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("integration failed at t = {t}: step size {step:e} underflowed")]
    IntegrationFailure { t: f64, step: f64 },

    #[error("steady state is not unique ({reason}); smallest singular values {singular_values:?}")]
    Degenerate {
        reason: String,
        singular_values: Option<[f64; 2]>,
    },

    #[error("correlation undefined: denominator {denominator:e} vanishes")]
    UndefinedCorrelation { denominator: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("offset correction already applied ({0})")]
    OffsetAlreadyApplied(f64),

    #[error("sample {sample} over emitters {indices:?} failed: {source}")]
    Sample {
        sample: usize,
        indices: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics themselves (integrator, solver,
    /// vanishing denominators), as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::IntegrationFailure { .. }
            | Error::Degenerate { .. }
            | Error::UndefinedCorrelation { .. }
            | Error::Singularity { .. } => true,
            Error::Sample { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
