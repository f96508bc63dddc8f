use thiserror::Error;

use crate::model::{Command, NodePath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid content identity: {0}")]
    InvalidContent(String),
    #[error("invalid command: {0:?}")]
    InvalidCommand(String),
    #[error("tree property violated at {0}: parent is not a directory")]
    TreeProperty(NodePath),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("command set is not simple at {0}")]
    NotSimple(NodePath),
    #[error("{upper} and {lower} mix construction and destruction")]
    MixedPairs {
        upper: Box<Command>,
        lower: Box<Command>,
    },
    #[error("no order of the set avoids breaking: {upper} and {lower} cannot be applied together")]
    NoValidOrder {
        upper: Box<Command>,
        lower: Box<Command>,
    },
}

/// The simplified sequence would break every filesystem.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sequence breaks every filesystem: {reason}")]
pub struct BreaksEverything {
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("cannot detect updates on a broken filesystem")]
    BrokenInput,
    #[error("detected updates cannot be ordered (internal error): {0}")]
    Order(#[from] OrderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconcileError {
    #[error("update sequence is not simple at {0}")]
    NotSimple(NodePath),
    #[error("reconciled commands cannot be ordered: {0}")]
    Order(#[from] OrderError),
    #[error("{0} is not excluded from reconciliation")]
    NotExcluded(Command),
}
