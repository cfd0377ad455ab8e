use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Unreadable { path: PathBuf, source: io::Error },
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] blockmix_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
}

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    /// A fit stopped at its sweep limit before meeting the tolerance.
    pub const MAX_SWEEPS: u8 = 2;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const NO_INPUT: u8 = 66;
    pub const SOFTWARE: u8 = 70;
    pub const CANT_CREATE: u8 = 73;
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::Core(blockmix_core::Error::InvalidConfig(_)) => exit::USAGE,
            Error::Unreadable { .. } => exit::NO_INPUT,
            Error::Parse { .. } | Error::Data(_) | Error::Core(_) => exit::DATA,
            Error::Write { .. } => exit::CANT_CREATE,
        }
    }

    pub(crate) fn data(source_name: &str, e: impl std::fmt::Display) -> Self {
        Error::Data(format!("{source_name}: {e}"))
    }
}
