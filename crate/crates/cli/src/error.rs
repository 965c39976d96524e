use regsvm_core::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Argument(String),

    #[error(transparent)]
    Core(#[from] regsvm_core::Error),

    #[error("unreadable manifest {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub const EXIT_IO: i32 = 1;
pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Argument(_) => EXIT_ARGUMENT,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Argument => EXIT_ARGUMENT,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Solver => EXIT_SOLVER,
                ErrorKind::Io => EXIT_IO,
            },
            CliError::Manifest(_) => EXIT_DATA,
            CliError::Io(_) | CliError::File { .. } | CliError::Json(_) => EXIT_IO,
        }
    }
}

/// Attaches `path` to a bare I/O failure.
pub fn with_path(e: impl Into<CliError>, path: &std::path::Path) -> CliError {
    match e.into() {
        CliError::Io(source) | CliError::Core(regsvm_core::Error::Io(source)) => CliError::File {
            path: path.display().to_string(),
            source,
        },
        other => other,
    }
}

pub fn arg_err(msg: impl Into<String>) -> CliError {
    CliError::Argument(msg.into())
}
