//! Directory-tree front end for `fsalg-core`: snapshot and script formats,
//! scanning, applying scripts, and the `fsalg` verbs.

pub mod apply;
pub mod commands;
pub mod error;
pub mod formats;
pub mod scan;

pub use commands::run;
pub use error::{exit, CliError};
