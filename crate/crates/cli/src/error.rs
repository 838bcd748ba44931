use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A malformed or missing cell. `row` counts file lines, header = 1.
    #[error("parse error at row {row}, column {column:?}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("response column {0} not found")]
    MissingResponse(String),
    #[error("column {column:?} is not numeric (row {row}: {value:?})")]
    NonNumericColumn {
        column: String,
        row: usize,
        value: String,
    },
    #[error("input has no data rows")]
    EmptyData,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sitscreen::Error),
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) => core_exit_code(e),
            Self::Config(_) => EXIT_CONFIG,
            _ => EXIT_INPUT,
        }
    }
}

fn core_exit_code(e: &sitscreen::Error) -> i32 {
    use sitscreen::Error as E;
    match e {
        E::DegenerateResponse | E::AllColumnsConstant | E::SampleTooSmall { .. } => EXIT_DEGENERATE,
        E::LengthMismatch { .. }
        | E::TooFewObservations { .. }
        | E::NonFinite(_)
        | E::InvalidDataset(_)
        | E::IndexOutOfRange { .. } => EXIT_INPUT,
        E::Replication { source, .. } => core_exit_code(source),
        _ => EXIT_CONFIG,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
