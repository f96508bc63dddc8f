//! Browser bindings: diff two trees, reconcile two replicas, classify a
//! command pair.
//!
//! Trees are written one entry per line: `path/` for a directory,
//! `path = text` for a file holding `text`. Missing parent directories are
//! implied; blank lines and lines starting with `#` are ignored. Commands
//! are written `xy /path [text]`, e.g. `bf /a/x hello`.

use std::collections::BTreeMap;
use std::fmt::Write;

use fsalg_core::algebra::{self, PairClass};
use fsalg_core::detect::{detect, detect_ordered};
use fsalg_core::model::{Command, ContentId, Filesystem, FsState, NodePath, TypeTag, Value};
use fsalg_core::reconcile::{dirty_marks, reconcile, state_based_conflicts};
use wasm_bindgen::prelude::*;

/// File contents seen so far, so commands can be shown with their text.
#[derive(Default)]
struct Contents(BTreeMap<ContentId, String>);

impl Contents {
    fn value(&mut self, text: &str) -> Value {
        let id = ContentId::of_bytes(text.as_bytes());
        self.0.insert(id, text.to_string());
        Value::File(id)
    }

    fn show_value(&self, v: &Value) -> String {
        match v {
            Value::Empty => "empty".into(),
            Value::Dir => "directory".into(),
            Value::File(id) => format!("{:?}", self.0.get(id).map(String::as_str).unwrap_or("?")),
        }
    }

    fn show(&self, c: &Command) -> String {
        match c.value() {
            Value::File(_) => format!("{} {} {}", c.code(), c.node(), self.show_value(c.value())),
            _ => format!("{} {}", c.code(), c.node()),
        }
    }

    fn show_tree(&self, fs: &Filesystem) -> String {
        let Some(state) = fs.state() else {
            return "(broken)\n".into();
        };
        let mut out = String::new();
        for (n, v) in state.entries() {
            match v {
                Value::Dir => writeln!(out, "{}/", &n.to_string()[1..]),
                _ => writeln!(
                    out,
                    "{} = {}",
                    &n.to_string()[1..],
                    self.0.get(id_of(v)).map(String::as_str).unwrap_or("?")
                ),
            }
            .expect("writing to a string");
        }
        if out.is_empty() {
            out.push_str("(empty)\n");
        }
        out
    }
}

fn id_of(v: &Value) -> &ContentId {
    match v {
        Value::File(id) => id,
        _ => unreachable!("only files have content"),
    }
}

fn parse_path(text: &str) -> Result<NodePath, String> {
    let trimmed = text.trim().trim_matches('/');
    NodePath::parse(&format!("/{trimmed}")).map_err(|e| e.to_string())
}

fn parse_tree(text: &str, contents: &mut Contents) -> Result<Filesystem, String> {
    let mut state = FsState::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (node, value) = match line.split_once('=') {
            Some((path, body)) => (parse_path(path), contents.value(body.trim())),
            None if line.ends_with('/') => (parse_path(line), Value::Dir),
            None => return Err(format!("line {}: expected `path/` or `path = text`", i + 1)),
        };
        let node = node.map_err(|e| format!("line {}: {e}", i + 1))?;
        for a in node.ancestors() {
            match state.get(&a) {
                Value::File(_) => {
                    return Err(format!("line {}: {a} is a file, not a directory", i + 1))
                }
                _ => state.set(a, Value::Dir),
            }
        }
        if !state.get(&node).is_empty() {
            return Err(format!("line {}: {node} listed twice", i + 1));
        }
        state.set(node, value);
    }
    Filesystem::new(state).map_err(|e| e.to_string())
}

fn parse_command(text: &str, contents: &mut Contents) -> Result<Command, String> {
    let text = text.trim();
    let (code, rest) = text.split_once(' ').ok_or("expected `xy /path [text]`")?;
    let mut letters = code.chars().map(TypeTag::from_letter);
    let (Some(Some(input)), Some(Some(output)), None) =
        (letters.next(), letters.next(), letters.next())
    else {
        return Err(format!("{code:?} is not a command code such as bf or db"));
    };
    let (path, body) = match rest.trim().split_once(' ') {
        Some((p, b)) => (p, Some(b)),
        None => (rest.trim(), None),
    };
    let node = parse_path(path)?;
    let value = match (output, body) {
        (TypeTag::File, Some(b)) => contents.value(b.trim()),
        (TypeTag::File, None) => return Err("a command writing a file needs its text".into()),
        (_, Some(_)) => return Err("only commands writing a file take text".into()),
        (t, None) => t.unique_value().expect("empty and directory are unique"),
    };
    Ok(Command::new(input, node, value))
}

/// The commands that turn `base` into `current`, in an order that applies.
pub fn diff_text(base: &str, current: &str) -> Result<String, String> {
    let mut contents = Contents::default();
    let base = parse_tree(base, &mut contents)?;
    let current = parse_tree(current, &mut contents)?;
    let script = detect_ordered(&base, &current).map_err(|e| e.to_string())?;
    if script.is_empty() {
        return Ok("(no changes)\n".into());
    }
    Ok(script.iter().map(|c| contents.show(c) + "\n").collect())
}

/// What each replica takes from the other, the conflicts, the resulting
/// trees, and what a dirty-mark comparator would flag instead.
pub fn reconcile_text(base: &str, a: &str, b: &str) -> Result<String, String> {
    let mut contents = Contents::default();
    let base = parse_tree(base, &mut contents)?;
    let fs_a = parse_tree(a, &mut contents)?;
    let fs_b = parse_tree(b, &mut contents)?;
    let updates_a = detect(&base, &fs_a).map_err(|e| e.to_string())?.commands;
    let updates_b = detect(&base, &fs_b).map_err(|e| e.to_string())?.commands;
    let plan = reconcile(&updates_a, &updates_b).map_err(|e| e.to_string())?;

    let mut out = String::new();
    let mut section = |title: &str, lines: Vec<String>| {
        let _ = writeln!(out, "{title}:");
        if lines.is_empty() {
            out.push_str("  (none)\n");
        }
        for l in lines {
            let _ = writeln!(out, "  {l}");
        }
    };
    section(
        "to replica A",
        plan.to_a.iter().map(|c| contents.show(c)).collect(),
    );
    section(
        "to replica B",
        plan.to_b.iter().map(|c| contents.show(c)).collect(),
    );
    section(
        "conflicts",
        plan.conflicts
            .iter()
            .map(|c| {
                format!(
                    "{}  vs  {}",
                    contents.show(&c.from_a),
                    contents.show(&c.from_b)
                )
            })
            .collect(),
    );
    let dirty_a = dirty_marks(&base, &fs_a).map_err(|e| e.to_string())?;
    let dirty_b = dirty_marks(&base, &fs_b).map_err(|e| e.to_string())?;
    let by_state =
        state_based_conflicts(&fs_a, &fs_b, &dirty_a, &dirty_b).map_err(|e| e.to_string())?;
    section(
        "flagged by dirty-mark comparison",
        by_state.iter().map(|n| n.to_string()).collect(),
    );
    let _ = write!(
        out,
        "\nreplica A afterwards:\n{}",
        contents.show_tree(&fs_a.apply_seq(&plan.to_a))
    );
    let _ = write!(
        out,
        "\nreplica B afterwards:\n{}",
        contents.show_tree(&fs_b.apply_seq(&plan.to_b))
    );
    Ok(out)
}

/// How `first` followed by `second` behaves.
pub fn classify_text(first: &str, second: &str) -> Result<String, String> {
    let mut contents = Contents::default();
    let c1 = parse_command(first, &mut contents)?;
    let c2 = parse_command(second, &mut contents)?;
    let class = algebra::classify_pair(&c1, &c2);
    let summary = match &class {
        PairClass::CommuteIncomparable => "unrelated nodes: the commands commute".to_string(),
        PairClass::BreaksAlways => "this pair breaks every filesystem".to_string(),
        PairClass::SimplifiesToEmpty => "the pair cancels out wherever it applies".to_string(),
        PairClass::SimplifiesToSingle(c) => {
            format!("the pair acts as the single command {}", contents.show(c))
        }
        PairClass::ConstructionPair => "construction: the parent must come first".to_string(),
        PairClass::DestructionPair => "destruction: the child must come first".to_string(),
        PairClass::AssertionAbsorbed => {
            "the type check is implied by the other command and can be dropped".to_string()
        }
    };
    let independent = if algebra::independent(&c1, &c2) {
        "independent"
    } else {
        "dependent"
    };
    Ok(format!("{summary}\n{independent}\n"))
}

#[wasm_bindgen]
pub fn diff_trees(base: &str, current: &str) -> Result<String, JsError> {
    diff_text(base, current).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn reconcile_trees(base: &str, a: &str, b: &str) -> Result<String, JsError> {
    reconcile_text(base, a, b).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify_pair(first: &str, second: &str) -> Result<String, JsError> {
    classify_text(first, second).map_err(|e| JsError::new(&e))
}
