//! Two-replica reconciliation and the dirty-mark comparator.
//!
//! Given the simple update sequences `A` and `B` that produced two replicas
//! from a common ancestor, every command of `A∖B` that is independent of all
//! of `B∖A` is propagated to replica B (and symmetrically). Whatever is left
//! over is reported as conflicting pairs.

use std::collections::BTreeSet;

use crate::algebra::{independent, sequence_kind};
use crate::detect::working;
use crate::error::{DetectError, ReconcileError};
use crate::model::{Command, CommandSequence, Filesystem, NodePath, Value};
use crate::ordering::order_canonical;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictKind {
    SameNodeDifferentValue,
    RelatedNodes,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConflictPair {
    pub from_a: Command,
    pub from_b: Command,
    /// The upper of the two nodes (they are equal or one is an ancestor).
    pub node_witness: NodePath,
    pub kind: ConflictKind,
}

impl ConflictPair {
    fn new(from_a: Command, from_b: Command) -> Self {
        let (na, nb) = (from_a.node(), from_b.node());
        let node_witness = if na.is_ancestor_of(nb) || na == nb {
            na.clone()
        } else {
            nb.clone()
        };
        let kind = if na == nb {
            ConflictKind::SameNodeDifferentValue
        } else {
            ConflictKind::RelatedNodes
        };
        ConflictPair {
            from_a,
            from_b,
            node_witness,
            kind,
        }
    }

    pub fn swapped(&self) -> ConflictPair {
        ConflictPair {
            from_a: self.from_b.clone(),
            from_b: self.from_a.clone(),
            node_witness: self.node_witness.clone(),
            kind: self.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconcilePlan {
    /// Commands from A to apply to replica B, in order.
    pub to_b: CommandSequence,
    /// Commands from B to apply to replica A, in order.
    pub to_a: CommandSequence,
    /// Every dependent pair across `A∖B` and `B∖A`.
    pub conflicts: Vec<ConflictPair>,
    pub a_minus_b: Vec<Command>,
    pub b_minus_a: Vec<Command>,
    pub a_intersect_b: Vec<Command>,
}

impl ReconcilePlan {
    /// Nodes of all commands involved in conflicts.
    pub fn conflict_nodes(&self) -> BTreeSet<NodePath> {
        self.conflicts
            .iter()
            .flat_map(|c| [c.from_a.node().clone(), c.from_b.node().clone()])
            .collect()
    }

    pub fn witness_nodes(&self) -> BTreeSet<NodePath> {
        self.conflicts
            .iter()
            .map(|c| c.node_witness.clone())
            .collect()
    }
}

fn check_simple(s: &[Command]) -> Result<(), ReconcileError> {
    if sequence_kind(s).simple {
        return Ok(());
    }
    let bad = s
        .iter()
        .find(|c| c.is_assertion() || s.iter().filter(|d| d.node() == c.node()).count() > 1)
        .expect("non-simple sequence has an offending command");
    Err(ReconcileError::NotSimple(bad.node().clone()))
}

pub fn reconcile(a: &[Command], b: &[Command]) -> Result<ReconcilePlan, ReconcileError> {
    check_simple(a)?;
    check_simple(b)?;
    let set_a: BTreeSet<&Command> = a.iter().collect();
    let set_b: BTreeSet<&Command> = b.iter().collect();
    let a_minus_b: Vec<Command> = set_a.difference(&set_b).map(|c| (*c).clone()).collect();
    let b_minus_a: Vec<Command> = set_b.difference(&set_a).map(|c| (*c).clone()).collect();
    let a_intersect_b: Vec<Command> = set_a.intersection(&set_b).map(|c| (*c).clone()).collect();

    let mut conflicts = Vec::new();
    let mut blocked_a = vec![false; a_minus_b.len()];
    let mut blocked_b = vec![false; b_minus_a.len()];
    for (i, alpha) in a_minus_b.iter().enumerate() {
        for (j, beta) in b_minus_a.iter().enumerate() {
            if !independent(alpha, beta) {
                blocked_a[i] = true;
                blocked_b[j] = true;
                conflicts.push(ConflictPair::new(alpha.clone(), beta.clone()));
            }
        }
    }

    let keep = |cmds: &[Command], blocked: &[bool]| -> Vec<Command> {
        cmds.iter()
            .zip(blocked)
            .filter(|(_, b)| !**b)
            .map(|(c, _)| c.clone())
            .collect()
    };
    let to_b = order_canonical(&keep(&a_minus_b, &blocked_a))?;
    let to_a = order_canonical(&keep(&b_minus_a, &blocked_b))?;

    Ok(ReconcilePlan {
        to_b,
        to_a,
        conflicts,
        a_minus_b,
        b_minus_a,
        a_intersect_b,
    })
}

/// Nodes that may have changed: every changed node and all its ancestors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirtySet {
    pub nodes: BTreeSet<NodePath>,
}

impl DirtySet {
    pub fn contains(&self, n: &NodePath) -> bool {
        self.nodes.contains(n)
    }

    pub fn is_up_closed(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.ancestors().all(|a| self.nodes.contains(&a)))
    }
}

pub fn dirty_marks(base: &Filesystem, new: &Filesystem) -> Result<DirtySet, DetectError> {
    let (base, new) = (working(base)?, working(new)?);
    let mut nodes = BTreeSet::new();
    let touched = base.entries().chain(new.entries()).map(|(n, _)| n);
    for n in touched {
        if base.get(n) != new.get(n) && nodes.insert(n.clone()) {
            nodes.extend(n.ancestors());
        }
    }
    Ok(DirtySet { nodes })
}

/// Nodes dirty on both sides whose values differ and are not both directories.
pub fn state_based_conflicts(
    fs_a: &Filesystem,
    fs_b: &Filesystem,
    dirty_a: &DirtySet,
    dirty_b: &DirtySet,
) -> Result<BTreeSet<NodePath>, DetectError> {
    let (fs_a, fs_b) = (working(fs_a)?, working(fs_b)?);
    Ok(dirty_a
        .nodes
        .intersection(&dirty_b.nodes)
        .filter(|n| {
            let (va, vb) = (fs_a.get(n), fs_b.get(n));
            va != vb && !(*va == Value::Dir && *vb == Value::Dir)
        })
        .cloned()
        .collect())
}

/// Why a command left out of reconciliation could not have been propagated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaximalityVerdict {
    /// Every replica B that is consistent with both update sequences is
    /// broken by any prefix-extended application of the command.
    BreaksReplica,
    /// The command applies, but replaces the value B wrote at this node.
    Overrides(NodePath),
}

/// Explains why `extra`, a command of `A∖B` that depends on some command of
/// `B∖A`, cannot be applied to replica B.
///
/// When B changed the same node, its command leaves a value of type
/// `beta.output()` there; if that matches the input type of `extra` the
/// command succeeds and overrides B's change, otherwise it breaks. A
/// dependent command of B on a related node always breaks the replica.
pub fn maximality_witness(
    a: &[Command],
    b: &[Command],
    extra: &Command,
) -> Result<MaximalityVerdict, ReconcileError> {
    check_simple(a)?;
    check_simple(b)?;
    if !a.contains(extra) || b.contains(extra) {
        return Err(ReconcileError::NotExcluded(extra.clone()));
    }
    let b_minus_a: Vec<&Command> = b.iter().filter(|c| !a.contains(c)).collect();
    if b_minus_a.iter().all(|beta| independent(extra, beta)) {
        return Err(ReconcileError::NotExcluded(extra.clone()));
    }
    let same_node = b_minus_a.iter().find(|beta| beta.node() == extra.node());
    Ok(match same_node {
        Some(beta) if beta.output() == extra.input() => {
            MaximalityVerdict::Overrides(extra.node().clone())
        }
        _ => MaximalityVerdict::BreaksReplica,
    })
}
