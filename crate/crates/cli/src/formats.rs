//! Text formats: snapshots, command scripts and conflict reports.

use std::fs;
use std::path::Path;

use fsalg_core::model::{ContentId, Filesystem, FsState, NodePath, Value};
use fsalg_core::{Command, ConflictPair};

use crate::error::{CliError, FormatError};

pub const SNAPSHOT_HEADER: &str = "FSSNAP 1";
pub const SCRIPT_HEADER: &str = "FSCMDS 1";

/// A scanned directory tree: `D <path>` and `F <path> <content>` lines in
/// path order, every other node empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    fs: Filesystem,
}

impl Snapshot {
    pub fn new(state: FsState) -> Result<Self, fsalg_core::ModelError> {
        Ok(Snapshot {
            fs: Filesystem::new(state)?,
        })
    }

    pub fn filesystem(&self) -> &Filesystem {
        &self.fs
    }

    pub fn state(&self) -> &FsState {
        self.fs.state().expect("snapshots are never broken")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(SNAPSHOT_HEADER);
        out.push('\n');
        for (n, v) in self.state().entries() {
            match v {
                Value::Dir => out.push_str(&format!("D {}\n", n.encoded())),
                Value::File(id) => out.push_str(&format!("F {} {id}\n", n.encoded())),
                Value::Empty => unreachable!("empty nodes are not stored"),
            }
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, FormatError> {
        let err = |line: usize, message: String| FormatError {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = body_lines(text, SNAPSHOT_HEADER).map_err(|m| err(1, m))?;
        let mut state = FsState::new();
        let mut previous: Option<NodePath> = None;
        for (i, line) in lines.by_ref() {
            let tokens: Vec<&str> = line.split(' ').collect();
            let (node, value) = match tokens.as_slice() {
                ["D", path] => (*path, Value::Dir),
                ["F", path, hash, size] => {
                    let id = ContentId::parse(hash, size).map_err(|e| err(i, e.to_string()))?;
                    (*path, Value::File(id))
                }
                _ => {
                    return Err(err(
                        i,
                        format!("expected `D <path>` or `F <path> <hash> <size>`, got {line:?}"),
                    ))
                }
            };
            let node = NodePath::from_encoded(node).map_err(|e| err(i, e.to_string()))?;
            if previous.as_ref().is_some_and(|p| *p >= node) {
                return Err(err(i, format!("{node} is out of order or repeated")));
            }
            if let Some(parent) = node.parent() {
                if *state.get(&parent) != Value::Dir {
                    return Err(err(
                        i,
                        format!("parent of {node} is not a listed directory"),
                    ));
                }
            }
            state.set(node.clone(), value);
            previous = Some(node);
        }
        Ok(Snapshot::new(state).expect("checked line by line"))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        Ok(Snapshot::parse(&text, &path.display().to_string())?)
    }
}

/// Lines after the header, numbered from 2. Requires LF line endings and a
/// final newline.
fn body_lines<'a>(
    text: &'a str,
    header: &str,
) -> Result<impl Iterator<Item = (usize, &'a str)>, String> {
    let body = text
        .strip_prefix(header)
        .and_then(|rest| rest.strip_prefix('\n'))
        .ok_or_else(|| format!("missing `{header}` header line"))?;
    if !body.is_empty() && !body.ends_with('\n') {
        return Err("last line is not terminated".into());
    }
    if body.contains('\r') {
        return Err("carriage return in file; line endings must be LF".into());
    }
    Ok(body.lines().enumerate().map(|(i, l)| (i + 2, l)))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| {
        CliError::Format(FormatError {
            path: path.display().to_string(),
            line: 0,
            message: "not UTF-8".into(),
        })
    })
}

/// Serializes commands one per line. Assertions change nothing and are
/// left out.
pub fn script_to_text<'a>(commands: impl IntoIterator<Item = &'a Command>) -> String {
    let mut out = String::from(SCRIPT_HEADER);
    out.push('\n');
    for c in commands.into_iter().filter(|c| !c.is_assertion()) {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_script(text: &str, origin: &str) -> Result<Vec<Command>, FormatError> {
    let err = |line: usize, message: String| FormatError {
        path: origin.to_string(),
        line,
        message,
    };
    body_lines(text, SCRIPT_HEADER)
        .map_err(|m| err(1, m))?
        .map(|(i, line)| line.parse::<Command>().map_err(|e| err(i, e.to_string())))
        .collect()
}

pub fn load_script(path: &Path) -> Result<Vec<Command>, CliError> {
    let text = read_text(path)?;
    Ok(parse_script(&text, &path.display().to_string())?)
}

pub fn conflicts_to_text(conflicts: &[ConflictPair]) -> String {
    conflicts
        .iter()
        .map(|c| format!("CONFLICT {} | {}\n", c.from_a, c.from_b))
        .collect()
}
