use std::io;
use std::path::PathBuf;

use fsalg_core::Command;
use thiserror::Error;

/// Exit statuses of the `fsalg` binary.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFLICTS: u8 = 1;
    pub const WOULD_BREAK: u8 = 2;
    pub const USAGE: u8 = 3;
}

#[derive(Debug, Error)]
#[error("{path}:{line}: {message}")]
pub struct FormatError {
    pub path: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("scan of {root} failed:\n{}", .problems.join("\n"))]
    Scan {
        root: PathBuf,
        problems: Vec<String>,
    },
    #[error("command {index} ({command}) would break the tree; nothing was changed")]
    WouldBreak { index: usize, command: Command },
    #[error("no content source for {0}")]
    MissingBlob(Command),
    #[error("content of {path} changed while copying for {command}")]
    BlobChanged { path: PathBuf, command: Command },
    #[error(
        "apply stopped at command {index} ({command}): {source}\n{completed} commands completed; the remaining script follows:\n{remaining}"
    )]
    Interrupted {
        index: usize,
        command: Command,
        completed: usize,
        remaining: String,
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Format(_) | CliError::Usage(_) => exit::USAGE,
            _ => exit::WOULD_BREAK,
        }
    }
}
