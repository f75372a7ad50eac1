use std::path::PathBuf;

/// Process exit codes.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] driftplan_core::Error),
    #[error("config hash mismatch: plan was stamped {expected}, field and config give {found}")]
    HashMismatch { expected: String, found: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Verification(String),
}

impl Error {
    pub fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format { line, msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Verification(_) => EXIT_VERIFICATION,
            _ => EXIT_VALIDATION,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
