//! Reading a directory tree into a snapshot.

use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use fsalg_core::model::{ContentId, FsState, HashAlgorithm, NodePath, Value};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::error::CliError;
use crate::formats::Snapshot;

pub const HASH_THREADS_VAR: &str = "FSALG_HASH_THREADS";

#[derive(Debug)]
pub struct ScanOutcome {
    pub snapshot: Snapshot,
    /// Absolute location of every node, for use as a content source.
    pub locations: Vec<(NodePath, PathBuf)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    File,
    Symlink,
}

/// Hashes a regular file by streaming it.
pub fn hash_file(path: &Path) -> io::Result<ContentId> {
    let mut hasher = Sha256::new();
    let size = io::copy(&mut File::open(path)?, &mut hasher)?;
    Ok(ContentId::new(
        HashAlgorithm::Sha256,
        hasher.finalize().into(),
        size,
    ))
}

/// A symlink is recorded as a file whose content is its target path.
pub fn hash_link(path: &Path) -> io::Result<ContentId> {
    let target = std::fs::read_link(path)?;
    Ok(ContentId::of_bytes(target.as_os_str().as_encoded_bytes()))
}

fn hash_threads() -> Option<usize> {
    std::env::var(HASH_THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Scans `root`. The root itself is the context of the forest; its entries
/// are the top-level nodes. Sockets, FIFOs and devices are skipped with a
/// warning; every unreadable entry is reported and the scan fails.
pub fn scan(root: &Path) -> Result<ScanOutcome, CliError> {
    let mut problems = Vec::new();
    let mut warnings = Vec::new();
    let mut dirs = Vec::new();
    let mut files: Vec<(NodePath, PathBuf, Kind)> = Vec::new();

    if !root.is_dir() {
        return Err(CliError::io(
            root,
            io::Error::new(io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    for entry in WalkDir::new(root)
        .min_depth(1)
        .follow_links(false)
        .sort_by_file_name()
    {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                problems.push(e.to_string());
                continue;
            }
        };
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walk stays below root");
        let segments: Option<Vec<&str>> = rel.iter().map(|s| s.to_str()).collect();
        let Some(segments) = segments else {
            problems.push(format!("{}: name is not UTF-8", entry.path().display()));
            continue;
        };
        let node = match NodePath::new(segments) {
            Ok(n) => n,
            Err(e) => {
                problems.push(format!("{}: {e}", entry.path().display()));
                continue;
            }
        };
        let ft = entry.file_type();
        if ft.is_dir() {
            dirs.push((node, entry.into_path()));
        } else if ft.is_file() {
            files.push((node, entry.into_path(), Kind::File));
        } else if ft.is_symlink() {
            files.push((node, entry.into_path(), Kind::Symlink));
        } else {
            warnings.push(format!("skipping special file {}", entry.path().display()));
        }
    }

    let hash_all = || -> Vec<Result<ContentId, String>> {
        files
            .par_iter()
            .map(|(_, path, kind)| {
                match kind {
                    Kind::File => hash_file(path),
                    Kind::Symlink => hash_link(path),
                }
                .map_err(|e| format!("{}: {e}", path.display()))
            })
            .collect()
    };
    let hashes = match hash_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("{HASH_THREADS_VAR}: {e}")))?
            .install(hash_all),
        None => hash_all(),
    };

    let mut state = FsState::new();
    let mut locations = Vec::with_capacity(dirs.len() + files.len());
    for (node, path) in dirs {
        state.set(node.clone(), Value::Dir);
        locations.push((node, path));
    }
    for ((node, path, _), hash) in files.into_iter().zip(hashes) {
        match hash {
            Ok(id) => {
                state.set(node.clone(), Value::File(id));
                locations.push((node, path));
            }
            Err(e) => problems.push(e),
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Scan {
            root: root.to_path_buf(),
            problems,
        });
    }
    let snapshot = Snapshot::new(state).expect("a directory walk respects the tree property");
    locations.sort();
    Ok(ScanOutcome {
        snapshot,
        locations,
        warnings,
    })
}
