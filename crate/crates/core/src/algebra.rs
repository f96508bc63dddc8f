//! Behaviour of adjacent command pairs, independence, inverses, and the
//! reduction of arbitrary command logs to simple sequences.

use std::collections::BTreeMap;

use crate::error::{BreaksEverything, OrderError};
use crate::model::{Command, CommandSequence, ContentId, Kinship, NodePath, TypeTag, Value};
use crate::ordering::order_canonical;

/// What a pair of commands applied one directly after the other amounts to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PairClass {
    /// Nodes are incomparable: the pair commutes and breaks nothing globally.
    CommuteIncomparable,
    /// The pair breaks every filesystem.
    BreaksAlways,
    /// Same node, back to the original empty or directory type: the pair is
    /// extended by the empty sequence.
    SimplifiesToEmpty,
    /// Same node: the pair is equivalent to this single command.
    SimplifiesToSingle(Command),
    /// The first command makes a directory at the parent of the node the
    /// second command fills.
    ConstructionPair,
    /// The first command empties a child of the node the second command
    /// turns into a non-directory.
    DestructionPair,
    /// Related nodes where an assertion (`bb` below, `dd` above) is implied
    /// by the other command: the pair commutes and the assertion can be
    /// dropped.
    AssertionAbsorbed,
}

/// Signature shared by [`classify_pair`] and substitute tables used in
/// negative controls.
pub type Classifier = fn(&Command, &Command) -> PairClass;

pub fn is_assertion(c: &Command) -> bool {
    c.is_assertion()
}

/// `parent·child` builds downward: `(b|f)d` on the parent, `b(f|d)` on the child.
pub fn is_construction_pair(upper: &Command, lower: &Command) -> bool {
    upper.node().kinship(lower.node()) == Kinship::Parent
        && upper.input() != TypeTag::Dir
        && upper.output() == TypeTag::Dir
        && lower.input() == TypeTag::Empty
        && lower.output() != TypeTag::Empty
}

/// `child·parent` tears upward: `(f|d)b` on the child, `d(b|f)` on the parent.
pub fn is_destruction_pair(lower: &Command, upper: &Command) -> bool {
    upper.node().kinship(lower.node()) == Kinship::Parent
        && lower.input() != TypeTag::Empty
        && lower.output() == TypeTag::Empty
        && upper.input() == TypeTag::Dir
        && upper.output() != TypeTag::Dir
}

/// Classifies `first·second`.
pub fn classify_pair(first: &Command, second: &Command) -> PairClass {
    let kinship = first.node().kinship(second.node());
    match kinship {
        Kinship::Incomparable => PairClass::CommuteIncomparable,
        Kinship::Equal => {
            if first.output() != second.input() {
                PairClass::BreaksAlways
            } else if first.input() == second.output() && first.input() != TypeTag::File {
                PairClass::SimplifiesToEmpty
            } else {
                PairClass::SimplifiesToSingle(Command::new(
                    first.input(),
                    first.node().clone(),
                    *second.value(),
                ))
            }
        }
        _ => {
            let first_is_upper = matches!(kinship, Kinship::Parent | Kinship::DistantAncestor);
            let (upper, lower) = if first_is_upper {
                (first, second)
            } else {
                (second, first)
            };
            if upper.has_tags(TypeTag::Dir, TypeTag::Dir)
                || lower.has_tags(TypeTag::Empty, TypeTag::Empty)
            {
                PairClass::AssertionAbsorbed
            } else if kinship == Kinship::Parent && is_construction_pair(first, second) {
                PairClass::ConstructionPair
            } else if kinship == Kinship::Child && is_destruction_pair(first, second) {
                PairClass::DestructionPair
            } else {
                PairClass::BreaksAlways
            }
        }
    }
}

/// Independence as implied by a pair class: the pair commutes with the same
/// effect and does not break everything.
pub fn independence_of(class: &PairClass, first: &Command, second: &Command) -> bool {
    match class {
        PairClass::CommuteIncomparable | PairClass::AssertionAbsorbed => true,
        // identical commands trivially give the same result in either order
        _ if first == second => *class != PairClass::BreaksAlways,
        _ => false,
    }
}

pub fn independent(a: &Command, b: &Command) -> bool {
    independence_of(&classify_pair(a, b), a, b)
}

/// Pairwise independence over the cross product.
pub fn independent_seq<'a, I, J>(s: I, t: J) -> bool
where
    I: IntoIterator<Item = &'a Command>,
    J: IntoIterator<Item = &'a Command> + Clone,
{
    s.into_iter()
        .all(|a| t.clone().into_iter().all(|b| independent(a, b)))
}

/// Swaps input and output type. The new output value is the unique value of
/// its type, or [`ContentId::PLACEHOLDER`] for files.
pub fn inverse(c: &Command) -> Command {
    let value = c
        .input()
        .unique_value()
        .unwrap_or(Value::File(ContentId::PLACEHOLDER));
    Command::new(c.output(), c.node().clone(), value)
}

pub fn inverse_seq(s: &CommandSequence) -> CommandSequence {
    s.iter().rev().map(inverse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceKindFlags {
    /// At most one command per node.
    pub minimal: bool,
    /// Minimal and free of assertions.
    pub simple: bool,
}

pub fn sequence_kind(commands: &[Command]) -> SequenceKindFlags {
    let mut nodes: Vec<&NodePath> = commands.iter().map(Command::node).collect();
    nodes.sort();
    let minimal = nodes.windows(2).all(|w| w[0] != w[1]);
    SequenceKindFlags {
        minimal,
        simple: minimal && !commands.iter().any(Command::is_assertion),
    }
}

/// Reduces a recorded command log to a simple sequence that agrees with it on
/// every filesystem it does not break.
///
/// Commands on one node are chained (merging or cancelling each other, as
/// adjacent same-node pairs do); assertions disappear; the survivors are put
/// in canonical order. A chain with mismatched types, an adjacent pair that
/// always breaks, or an unorderable result means the log breaks every
/// filesystem.
pub fn simplify(s: &CommandSequence) -> Result<CommandSequence, BreaksEverything> {
    if s.contains_break() {
        return Err(BreaksEverything {
            reason: "contains the break command".into(),
        });
    }
    for w in s.commands().windows(2) {
        if classify_pair(&w[0], &w[1]) == PairClass::BreaksAlways {
            return Err(BreaksEverything {
                reason: format!("{} followed by {}", w[0], w[1]),
            });
        }
    }

    // node -> (first input type, latest value)
    let mut chains: BTreeMap<&NodePath, (TypeTag, Value)> = BTreeMap::new();
    for c in s {
        match chains.get_mut(c.node()) {
            None => {
                chains.insert(c.node(), (c.input(), *c.value()));
            }
            Some((_, current)) => {
                if current.tag() != c.input() {
                    return Err(BreaksEverything {
                        reason: format!(
                            "{c} finds type {} at {}",
                            current.tag().letter(),
                            c.node()
                        ),
                    });
                }
                *current = *c.value();
            }
        }
    }

    let merged: Vec<Command> = chains
        .into_iter()
        .filter(|(_, (input, value))| *input != value.tag() || *input == TypeTag::File)
        .map(|(node, (input, value))| Command::new(input, node.clone(), value))
        .collect();

    order_canonical(&merged).map_err(|e| match e {
        OrderError::NotSimple(n) => BreaksEverything {
            reason: format!("not simple at {n}"),
        },
        other => BreaksEverything {
            reason: other.to_string(),
        },
    })
}
