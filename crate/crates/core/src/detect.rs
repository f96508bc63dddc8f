//! Update detection: the simple command set that turns one snapshot into
//! another.

use std::collections::BTreeSet;

use crate::error::DetectError;
use crate::model::{Command, CommandSequence, Filesystem, FsState, NodePath};
use crate::ordering::order_canonical;

/// A finite set of nodes closed under `parent`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NodeForest {
    nodes: BTreeSet<NodePath>,
}

impl NodeForest {
    /// The given nodes together with all of their ancestors.
    pub fn closure<I: IntoIterator<Item = NodePath>>(nodes: I) -> Self {
        let mut set = BTreeSet::new();
        for n in nodes {
            for a in n.ancestors() {
                if !set.insert(a) {
                    break;
                }
            }
            set.insert(n);
        }
        NodeForest { nodes: set }
    }

    pub fn contains(&self, n: &NodePath) -> bool {
        self.nodes.contains(n)
    }

    /// Nodes in path order, parents before children.
    pub fn iter(&self) -> impl Iterator<Item = &NodePath> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = &NodePath> {
        self.nodes.iter().filter(|n| n.depth() == 1)
    }

    pub fn children<'a>(&'a self, n: &'a NodePath) -> impl Iterator<Item = &'a NodePath> + 'a {
        self.nodes
            .iter()
            .filter(move |m| m.depth() == n.depth() + 1 && n.is_ancestor_of(m))
    }

    pub fn is_closed(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.parent().is_none_or(|p| self.nodes.contains(&p)))
    }
}

/// The detected updates: one command per changed node, in path order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateSet {
    pub commands: Vec<Command>,
    /// Parent-closure of the non-empty nodes of both snapshots.
    pub source_forest: NodeForest,
}

pub(crate) fn working(fs: &Filesystem) -> Result<&FsState, DetectError> {
    fs.state().ok_or(DetectError::BrokenInput)
}

/// For every node whose value differs, the command from the old type to the
/// new value.
pub fn detect(base: &Filesystem, new: &Filesystem) -> Result<UpdateSet, DetectError> {
    let (base, new) = (working(base)?, working(new)?);
    let forest = NodeForest::closure(base.entries().chain(new.entries()).map(|(n, _)| n.clone()));
    let commands = forest
        .iter()
        .filter(|n| base.get(n) != new.get(n))
        .map(|n| Command::new(base.get(n).tag(), n.clone(), *new.get(n)))
        .collect();
    Ok(UpdateSet {
        commands,
        source_forest: forest,
    })
}

/// Detected updates in canonical order; applying them to `base` yields `new`.
pub fn detect_ordered(base: &Filesystem, new: &Filesystem) -> Result<CommandSequence, DetectError> {
    let updates = detect(base, new)?;
    Ok(order_canonical(&updates.commands)?)
}
