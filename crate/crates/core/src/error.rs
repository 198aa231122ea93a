use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("feasible region is empty")]
    EmptyRegion,

    #[error("feasible region is unbounded")]
    Unbounded,

    #[error("feasible region is not full-dimensional (affine dimension {found} < {expected})")]
    DegenerateRegion { expected: usize, found: usize },

    #[error("no feasible starting point found after {attempts} attempts")]
    StartFailure { attempts: usize },

    #[error("{found} retained samples, at least {required} required")]
    InsufficientSamples { found: usize, required: usize },

    #[error("grid quadrature supports at most 3 dimensions, problem has {0}")]
    UnsupportedDimension(usize),

    #[error("{found} data rows in window, at least {required} required")]
    InsufficientData { found: usize, required: usize },

    #[error("no crossing temperature in (0, {upper})")]
    NoCrossing { upper: f64 },

    /// Problem-file schema violation; `field` names the offending entry.
    #[error("problem file: field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::DimensionMismatch { .. } => 2,
            Error::Schema { .. } | Error::Json(_) => 3,
            Error::Io(_) | Error::Csv(_) => 4,
            Error::EmptyRegion => 10,
            Error::Unbounded => 11,
            Error::DegenerateRegion { .. } => 12,
            Error::StartFailure { .. } => 20,
            Error::InsufficientSamples { .. } => 21,
            Error::UnsupportedDimension(_) => 22,
            Error::InsufficientData { .. } => 30,
            Error::NoCrossing { .. } => 31,
        }
    }
}
