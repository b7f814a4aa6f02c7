use std::fmt;

use biphoton_core::Error;

pub const VALIDATION: u8 = 2;
pub const NUMERICAL: u8 = 3;
pub const IO: u8 = 4;

/// MLE stopped before reaching the gradient tolerance under `--strict`.
#[derive(Debug)]
pub struct NotConverged {
    pub iterations: usize,
}

impl fmt::Display for NotConverged {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MLE did not converge after {} iterations", self.iterations)
    }
}

impl std::error::Error for NotConverged {}

/// Usage problems raised by the CLI itself.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn core_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::UnknownStrategy { .. }
        | Error::AllZeroCoefficients
        | Error::EmptyState
        | Error::RegionTooSmall { .. }
        | Error::NonHermitianInput { .. } => VALIDATION,
        Error::NegativeEigenvalue { .. }
        | Error::SingularSystem
        | Error::DegenerateParameters { .. }
        | Error::ZeroDenominator { .. }
        | Error::EmptySignal { .. } => NUMERICAL,
        Error::Io { .. } | Error::Image(_) => IO,
    }
}

pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
        if cause.is::<NotConverged>() {
            return NUMERICAL;
        }
        if cause.is::<Usage>() || cause.is::<serde_json::Error>() {
            return VALIDATION;
        }
        if cause.is::<std::io::Error>() {
            return IO;
        }
    }
    NUMERICAL
}
