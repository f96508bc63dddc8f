//! Random forests and filesystems for property tests.
#![allow(dead_code)]

use fsalg_core::model::{ContentId, Filesystem, FsState, NodePath, Value};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn p(s: &str) -> NodePath {
    NodePath::parse(s).unwrap()
}

pub fn fv(i: usize) -> Value {
    Value::File(ContentId::of_bytes(format!("f{i}").as_bytes()))
}

/// A forest of `1..=max_nodes` nodes in path order, parents first.
pub fn random_forest<R: Rng>(rng: &mut R, max_nodes: usize) -> Vec<NodePath> {
    let count = rng.random_range(1..=max_nodes);
    let mut nodes: Vec<NodePath> = Vec::with_capacity(count);
    for i in 0..count {
        let name = format!("n{i}");
        let node = if nodes.is_empty() || rng.random_bool(0.25) {
            NodePath::new([name]).unwrap()
        } else {
            nodes.choose(rng).unwrap().child(name).unwrap()
        };
        nodes.push(node);
    }
    nodes.sort();
    nodes
}

fn random_value<R: Rng>(rng: &mut R, files: usize) -> Value {
    match rng.random_range(0..4) {
        0 => Value::Empty,
        1 | 2 => Value::Dir,
        _ => fv(rng.random_range(1..=files)),
    }
}

/// Assigns values top-down, forcing `Empty` below non-directories.
fn build<R: Rng>(
    rng: &mut R,
    nodes: &[NodePath],
    mut pick: impl FnMut(&mut R, &NodePath) -> Value,
) -> Filesystem {
    let mut state = FsState::new();
    for n in nodes {
        let parent_dir = n.parent().is_none_or(|q| *state.get(&q) == Value::Dir);
        let v = if parent_dir {
            pick(rng, n)
        } else {
            Value::Empty
        };
        state.set(n.clone(), v);
    }
    Filesystem::new(state).unwrap()
}

pub fn random_fs<R: Rng>(rng: &mut R, nodes: &[NodePath], files: usize) -> Filesystem {
    build(rng, nodes, |r, _| random_value(r, files))
}

/// A filesystem that agrees with `base` on each node with probability
/// `keep`, where the tree property allows.
pub fn mutate<R: Rng>(
    rng: &mut R,
    base: &Filesystem,
    nodes: &[NodePath],
    files: usize,
    keep: f64,
) -> Filesystem {
    build(rng, nodes, |r, n| {
        if r.random_bool(keep) {
            *base.get(n).unwrap()
        } else {
            random_value(r, files)
        }
    })
}
