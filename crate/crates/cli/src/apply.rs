//! Carrying out a command script on a real directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fsalg_core::model::{ContentId, NodePath, TypeTag, Value};
use fsalg_core::Command;

use crate::error::CliError;
use crate::formats::script_to_text;
use crate::scan::{hash_file, scan, ScanOutcome};

#[derive(Debug, Clone, Default)]
pub struct ApplyOptions {
    /// Directory holding the contents the script writes, usually the other
    /// replica. The target directory is always searched as well.
    pub blobs: Option<PathBuf>,
    pub dry_run: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplyReport {
    pub applied: usize,
    pub dry_run: bool,
}

#[derive(Debug, Clone)]
enum Source {
    File(PathBuf),
    Link(PathBuf),
}

pub fn node_path(root: &Path, n: &NodePath) -> PathBuf {
    let mut p = root.to_path_buf();
    p.extend(n.segments());
    p
}

fn index_sources(
    outcome: &ScanOutcome,
    into: &mut BTreeMap<ContentId, (NodePath, Source)>,
) -> Result<(), CliError> {
    for (node, path) in &outcome.locations {
        let Some(Value::File(id)) = outcome.snapshot.filesystem().get(node) else {
            continue;
        };
        if into.contains_key(id) {
            continue;
        }
        let meta = fs::symlink_metadata(path).map_err(|e| CliError::io(path, e))?;
        let source = if meta.file_type().is_symlink() {
            Source::Link(fs::read_link(path).map_err(|e| CliError::io(path, e))?)
        } else {
            Source::File(path.clone())
        };
        into.insert(*id, (node.clone(), source));
    }
    Ok(())
}

/// Simulates the script against a fresh scan of `dir`, then performs it.
/// Nothing is touched if the simulation breaks or content is missing.
pub fn apply_script(
    commands: &[Command],
    dir: &Path,
    opts: &ApplyOptions,
) -> Result<ApplyReport, CliError> {
    let current = scan(dir)?;
    let mut sim = current.snapshot.filesystem().clone();
    for (i, c) in commands.iter().enumerate() {
        sim.apply_in_place(c);
        if sim.is_broken() {
            return Err(CliError::WouldBreak {
                index: i + 1,
                command: c.clone(),
            });
        }
    }

    // external sources first: local ones may be removed by the script
    let mut external = BTreeMap::new();
    if let Some(blobs) = &opts.blobs {
        index_sources(&scan(blobs)?, &mut external)?;
    }
    let mut local = BTreeMap::new();
    index_sources(&current, &mut local)?;

    let mut needed: BTreeMap<ContentId, Option<Source>> = BTreeMap::new();
    for c in commands.iter().filter(|c| c.output() == TypeTag::File) {
        let Value::File(id) = c.value() else {
            unreachable!()
        };
        if needed.contains_key(id) {
            continue;
        }
        let source = if let Some((_, s)) = external.get(id) {
            s.clone()
        } else if let Some((node, s)) = local.get(id) {
            let clobbered = commands
                .iter()
                .any(|d| d.node() == node || d.node().is_ancestor_of(node));
            match s {
                Source::File(_) if clobbered => {
                    needed.insert(*id, None);
                    continue;
                }
                _ => s.clone(),
            }
        } else {
            return Err(CliError::MissingBlob(c.clone()));
        };
        needed.insert(*id, Some(source));
    }

    if opts.dry_run {
        return Ok(ApplyReport {
            applied: 0,
            dry_run: true,
        });
    }

    let stage = Stage::new(&needed, &local)?;
    for (i, c) in commands.iter().enumerate() {
        if let Err(e) = perform(c, dir, &needed, &stage) {
            return Err(CliError::Interrupted {
                index: i + 1,
                command: c.clone(),
                completed: i,
                remaining: script_to_text(&commands[i..]),
                source: Box::new(e),
            });
        }
    }
    Ok(ApplyReport {
        applied: commands.len(),
        dry_run: false,
    })
}

/// Copies of local contents that the script itself would delete before
/// they are needed.
struct Stage {
    dir: Option<PathBuf>,
    files: BTreeMap<ContentId, PathBuf>,
}

impl Stage {
    fn new(
        needed: &BTreeMap<ContentId, Option<Source>>,
        local: &BTreeMap<ContentId, (NodePath, Source)>,
    ) -> Result<Self, CliError> {
        let mut stage = Stage {
            dir: None,
            files: BTreeMap::new(),
        };
        for (id, _) in needed.iter().filter(|(_, s)| s.is_none()) {
            let dir = match &stage.dir {
                Some(d) => d.clone(),
                None => {
                    let d =
                        std::env::temp_dir().join(format!("fsalg-stage-{}", std::process::id()));
                    fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
                    stage.dir = Some(d.clone());
                    d
                }
            };
            let (_, Source::File(from)) = &local[id] else {
                unreachable!()
            };
            let to = dir.join(format!("{}", stage.files.len()));
            fs::copy(from, &to).map_err(|e| CliError::io(from, e))?;
            stage.files.insert(*id, to);
        }
        Ok(stage)
    }
}

impl Drop for Stage {
    fn drop(&mut self) {
        if let Some(d) = &self.dir {
            let _ = fs::remove_dir_all(d);
        }
    }
}

fn perform(
    c: &Command,
    root: &Path,
    needed: &BTreeMap<ContentId, Option<Source>>,
    stage: &Stage,
) -> Result<(), CliError> {
    let path = node_path(root, c.node());
    let io = |e| CliError::io(&path, e);
    match (c.input(), c.value()) {
        (TypeTag::Empty, Value::Empty) | (TypeTag::Dir, Value::Dir) => {}
        (TypeTag::File, Value::Empty) => fs::remove_file(&path).map_err(io)?,
        (TypeTag::Dir, Value::Empty) => fs::remove_dir(&path).map_err(io)?,
        (input, Value::Dir) => {
            if input == TypeTag::File {
                fs::remove_file(&path).map_err(io)?;
            }
            fs::create_dir(&path).map_err(io)?;
        }
        (input, Value::File(id)) => {
            if input == TypeTag::Dir {
                fs::remove_dir(&path).map_err(io)?;
            }
            let source = match &needed[id] {
                Some(s) => s.clone(),
                None => Source::File(stage.files[id].clone()),
            };
            write_content(c, &path, id, &source)?;
        }
    }
    Ok(())
}

fn write_content(
    c: &Command,
    path: &Path,
    id: &ContentId,
    source: &Source,
) -> Result<(), CliError> {
    let name = path
        .file_name()
        .expect("node paths have a final segment")
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.fsalg-tmp-{}", std::process::id()));
    match source {
        Source::File(from) => {
            fs::copy(from, &tmp).map_err(|e| CliError::io(from, e))?;
            let copied = hash_file(&tmp).map_err(|e| CliError::io(&tmp, e))?;
            if copied != *id {
                let _ = fs::remove_file(&tmp);
                return Err(CliError::BlobChanged {
                    path: from.clone(),
                    command: c.clone(),
                });
            }
        }
        Source::Link(target) => make_link(target, &tmp)?,
    }
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[cfg(unix)]
fn make_link(target: &Path, at: &Path) -> Result<(), CliError> {
    std::os::unix::fs::symlink(target, at).map_err(|e| CliError::io(at, e))
}

#[cfg(not(unix))]
fn make_link(_target: &Path, at: &Path) -> Result<(), CliError> {
    Err(CliError::io(
        at,
        std::io::Error::new(
            std::io::ErrorKind::Unsupported,
            "symbolic links are not supported here",
        ),
    ))
}
