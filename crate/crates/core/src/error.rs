use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRecord { line: u64, message: String },

    #[error("line {line}: negative flow value {value}")]
    NegativeValue { line: u64, value: f64 },

    #[error("line {line}: unknown country code \"{code}\"")]
    UnknownCountry { line: u64, code: String },

    #[error("no data for year {0}")]
    NoDataForYear(i32),

    #[error("invalid trade matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("country {0} is a frozen seed and cannot be updated")]
    FrozenCountry(String),

    #[error("dimension mismatch: expected {expected} currencies, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("{runs} of {total} runs did not reach a fixed point")]
    RunsNotConverged { runs: usize, total: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 data, 2 parameter, 3 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MalformedRecord { .. }
            | Error::NegativeValue { .. }
            | Error::UnknownCountry { .. }
            | Error::NoDataForYear(_)
            | Error::InvalidMatrix(_)
            | Error::NonConvergence { .. }
            | Error::Io { .. } => 1,
            Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::FrozenCountry(_)
            | Error::Dimension { .. } => 2,
            Error::RunsNotConverged { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
