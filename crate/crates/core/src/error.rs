use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("matrix has eigenvalue {value:.3e} below the PSD tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("design matrix is singular or rank-deficient")]
    SingularSystem,

    #[error("parameter vector is degenerate (Tr(T^H T) = {trace:.3e})")]
    DegenerateParameters { trace: f64 },

    #[error("background level minus environment level is not positive for setting {setting} ({denominator:.3e})")]
    ZeroDenominator { setting: String, denominator: f64 },

    #[error("background region has {len} bins, need at least {min}")]
    RegionTooSmall { len: usize, min: usize },

    #[error("computational-basis coincidence sum is not positive ({sum:.3e})")]
    EmptySignal { sum: f64 },

    #[error("all OAM coefficients are zero")]
    AllZeroCoefficients,

    #[error("no l=0 component survives etalon filtering")]
    EmptyState,

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
