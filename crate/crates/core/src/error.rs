use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("non-finite state for particle (p={p}, q={q}) at step {step}")]
    ParticleBlowup { p: usize, q: usize, step: usize },

    #[error("covariance is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("moment matrix lost positive definiteness at degree {degree}")]
    IllPosedMoments { degree: u32 },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),

    #[error("model parameter violation: {0}")]
    ParameterViolation(String),

    #[error("constraint system is infeasible (least-squares residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("simplex lost accuracy (final residual {residual:e})")]
    LpBreakdown { residual: f64 },

    #[error("simplex iteration cap reached after {iterations} iterations")]
    IterationCap { iterations: usize, best_weights: Vec<f64> },

    #[error("restart {index} failed: {source}")]
    Restart {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("config error for key `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("missing required config keys: {0:?}")]
    MissingKeys(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse { .. }
                | Error::ConfigValue { .. }
                | Error::MissingKeys(_)
                | Error::UnknownModel(_)
                | Error::UnknownDistribution(_)
                | Error::ParameterViolation(_)
                | Error::InvalidArgument(_)
                | Error::Io(_)
        )
    }
}
