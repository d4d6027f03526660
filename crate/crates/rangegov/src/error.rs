use std::io;
use std::path::{Path, PathBuf};

/// Process exit codes. Usage errors come from the argument parser as 2.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const SCHEMA: u8 = 3;
    pub const MISSING_SERIES: u8 = 4;
    pub const QUALITY: u8 = 5;
    pub const CONFIG: u8 = 6;
    pub const INSUFFICIENT_DATA: u8 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {msg}", path.display())]
    Schema { path: PathBuf, msg: String },

    #[error("missing series: {0}")]
    Missing(String),

    #[error("quality pipeline rejected the panel ({0} reject flags)")]
    Quality(usize),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] rangegov_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn schema(path: &Path, msg: impl Into<String>) -> Self {
        Error::Schema { path: path.to_path_buf(), msg: msg.into() }
    }

    pub fn exit_code(&self) -> u8 {
        use rangegov_core::Error as C;
        match self {
            Error::Io { .. } => exit::IO,
            Error::Schema { .. } => exit::SCHEMA,
            Error::Missing(_) => exit::MISSING_SERIES,
            Error::Quality(_) => exit::QUALITY,
            Error::Config(_) => exit::CONFIG,
            Error::Usage(_) => exit::USAGE,
            Error::Core(e) => match e {
                C::UnknownConfigKey(_) | C::InvalidConfigValue { .. } => exit::CONFIG,
                C::TooShort { .. } | C::InsufficientInputs { .. } | C::WindowTooLong { .. } => exit::INSUFFICIENT_DATA,
                _ => exit::SCHEMA,
            },
        }
    }
}
