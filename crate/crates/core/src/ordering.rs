//! Ordering simple command sets so that they can be applied.
//!
//! The nodes touched by a simple set fall into components of mutually
//! comparable nodes. Commands in different components commute freely. Inside
//! a component every command sits directly below another one (or is the
//! topmost), and each parent–child link is either a construction pair, where
//! the parent goes first, or a destruction pair, where the child goes first.
//! A component never mixes the two.

use std::collections::BTreeMap;

use crate::algebra::{is_construction_pair, is_destruction_pair, sequence_kind};
use crate::error::OrderError;
use crate::model::{Command, CommandSequence, NodePath, TypeTag};

/// Cap on [`enumerate_orders`] output; orders of a set can be factorial in number.
pub const DEFAULT_ORDER_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Singleton,
    /// Parents precede children.
    Construction,
    /// Children precede parents.
    Destruction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    kind: ComponentKind,
    /// Preorder, children in path order.
    commands: Vec<Command>,
    /// Index of the command on the parent node, for every command but the first.
    parents: Vec<Option<usize>>,
}

impl Component {
    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn topmost(&self) -> &Command {
        &self.commands[0]
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    fn children(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.parents
            .iter()
            .enumerate()
            .filter(move |(_, p)| **p == Some(idx))
            .map(|(i, _)| i)
    }

    fn push_canonical(&self, idx: usize, out: &mut Vec<Command>) {
        if self.kind != ComponentKind::Destruction {
            out.push(self.commands[idx].clone());
        }
        for child in self.children(idx) {
            self.push_canonical(child, out);
        }
        if self.kind == ComponentKind::Destruction {
            out.push(self.commands[idx].clone());
        }
    }

    /// (before, after) index pairs that every valid order must respect.
    fn precedences(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents.iter().enumerate().filter_map(|(child, p)| {
            p.map(|parent| match self.kind {
                ComponentKind::Destruction => (child, parent),
                _ => (parent, child),
            })
        })
    }
}

fn check_simple(u: &[Command]) -> Result<(), OrderError> {
    if sequence_kind(u).simple {
        return Ok(());
    }
    if let Some(c) = u.iter().find(|c| c.is_assertion()) {
        return Err(OrderError::NotSimple(c.node().clone()));
    }
    let mut nodes: Vec<&NodePath> = u.iter().map(Command::node).collect();
    nodes.sort();
    let dup = nodes
        .windows(2)
        .find(|w| w[0] == w[1])
        .map(|w| w[0].clone());
    Err(OrderError::NotSimple(
        dup.expect("non-minimal set has a repeated node"),
    ))
}

/// Splits a simple set into components, each listed in preorder. Components
/// come in path order of their topmost node.
pub fn components(u: &[Command]) -> Result<Vec<Component>, OrderError> {
    check_simple(u)?;
    let mut sorted: Vec<&Command> = u.iter().collect();
    sorted.sort();
    let index: BTreeMap<&NodePath, usize> = sorted
        .iter()
        .enumerate()
        .map(|(i, c)| (c.node(), i))
        .collect();

    // nearest touched ancestor of every command; a gap means the two can
    // only be made adjacent as distant relatives, which always breaks
    let mut up: Vec<Option<usize>> = Vec::with_capacity(sorted.len());
    for c in &sorted {
        let nearest = c.node().ancestors().find_map(|a| index.get(&a).copied());
        if let Some(j) = nearest {
            if sorted[j].node().depth() + 1 != c.node().depth() {
                return Err(OrderError::NoValidOrder {
                    upper: Box::new(sorted[j].clone()),
                    lower: Box::new((*c).clone()),
                });
            }
        }
        up.push(nearest);
    }

    // sorted order is a preorder, so each component is a contiguous run
    let mut result = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let root = sorted[start].node();
        let end = (start + 1..sorted.len())
            .find(|&i| !root.is_ancestor_of(sorted[i].node()))
            .unwrap_or(sorted.len());
        let commands: Vec<Command> = sorted[start..end].iter().map(|c| (*c).clone()).collect();
        let parents: Vec<Option<usize>> = up[start..end]
            .iter()
            .map(|p| p.map(|j| j - start))
            .collect();
        let kind = if commands.len() == 1 {
            ComponentKind::Singleton
        } else if commands[0].output() == TypeTag::Dir {
            ComponentKind::Construction
        } else {
            ComponentKind::Destruction
        };
        for (child, parent) in parents.iter().enumerate() {
            let Some(parent) = *parent else { continue };
            let (upper, lower) = (&commands[parent], &commands[child]);
            let fits = match kind {
                ComponentKind::Construction => is_construction_pair(upper, lower),
                _ => is_destruction_pair(lower, upper),
            };
            if !fits {
                return Err(OrderError::MixedPairs {
                    upper: Box::new(upper.clone()),
                    lower: Box::new(lower.clone()),
                });
            }
        }
        result.push(Component {
            kind,
            commands,
            parents,
        });
        start = end;
    }
    Ok(result)
}

fn no_valid_order(e: OrderError) -> OrderError {
    match e {
        OrderError::MixedPairs { upper, lower } => OrderError::NoValidOrder { upper, lower },
        other => other,
    }
}

/// One valid order: components one after the other in path order of their
/// topmost node; construction components top-down, destruction components
/// bottom-up, siblings in path order.
pub fn order_canonical(u: &[Command]) -> Result<CommandSequence, OrderError> {
    let comps = components(u).map_err(no_valid_order)?;
    let mut out = Vec::with_capacity(u.len());
    for comp in &comps {
        comp.push_canonical(0, &mut out);
    }
    Ok(out.into())
}

/// Distinct valid orders of `u`, at most `limit` of them, including every
/// interleaving of the components. Orders are produced lexicographically by
/// command, so the first one is deterministic.
pub fn enumerate_orders(u: &[Command], limit: usize) -> Result<Vec<CommandSequence>, OrderError> {
    let comps = components(u).map_err(no_valid_order)?;
    let mut commands = Vec::new();
    let mut preds: Vec<Vec<usize>> = Vec::new();
    for comp in &comps {
        let base = commands.len();
        commands.extend(comp.commands.iter().cloned());
        preds.extend(std::iter::repeat_with(Vec::new).take(comp.len()));
        for (before, after) in comp.precedences() {
            preds[base + after].push(base + before);
        }
    }
    // candidates are tried in command order
    let mut by_command: Vec<usize> = (0..commands.len()).collect();
    by_command.sort_by(|&a, &b| commands[a].cmp(&commands[b]));

    struct Search<'a> {
        commands: &'a [Command],
        preds: &'a [Vec<usize>],
        by_command: &'a [usize],
        placed: Vec<bool>,
        current: Vec<usize>,
        out: Vec<CommandSequence>,
        limit: usize,
    }

    impl Search<'_> {
        fn run(&mut self) {
            if self.out.len() >= self.limit {
                return;
            }
            if self.current.len() == self.commands.len() {
                self.out.push(
                    self.current
                        .iter()
                        .map(|&i| self.commands[i].clone())
                        .collect(),
                );
                return;
            }
            for &i in self.by_command {
                if self.placed[i] || !self.preds[i].iter().all(|&p| self.placed[p]) {
                    continue;
                }
                self.placed[i] = true;
                self.current.push(i);
                self.run();
                self.current.pop();
                self.placed[i] = false;
            }
        }
    }

    let mut search = Search {
        commands: &commands,
        preds: &preds,
        by_command: &by_command,
        placed: vec![false; commands.len()],
        current: Vec::new(),
        out: Vec::new(),
        limit: limit.max(1),
    };
    search.run();
    Ok(search.out)
}

/// True iff `s` is one of the orders of its own command set.
pub fn is_valid_order(s: &[Command]) -> bool {
    let Ok(comps) = components(s) else {
        return false;
    };
    let position: BTreeMap<&Command, usize> = s.iter().enumerate().map(|(i, c)| (c, i)).collect();
    comps.iter().all(|comp| {
        comp.precedences().all(|(before, after)| {
            position[&comp.commands[before]] < position[&comp.commands[after]]
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContentId, Value};
    use TypeTag::{Dir as D, Empty as B, File as F};

    fn cmd(input: TypeTag, node: &str, value: Value) -> Command {
        Command::new(input, NodePath::parse(node).unwrap(), value)
    }

    fn fv(label: &str) -> Value {
        Value::File(ContentId::of_bytes(label.as_bytes()))
    }

    #[test]
    fn components_examples() {
        let comps = components(&[cmd(B, "/a/x", fv("f1")), cmd(B, "/a", Value::Dir)]).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].kind(), ComponentKind::Construction);

        let comps = components(&[cmd(B, "/a", fv("f1")), cmd(B, "/b", fv("f2"))]).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.kind() == ComponentKind::Singleton));

        let comps = components(&[
            cmd(F, "/a/x", Value::Empty),
            cmd(D, "/a", Value::Empty),
            cmd(B, "/b", fv("f1")),
        ])
        .unwrap();
        let kinds: Vec<_> = comps.iter().map(Component::kind).collect();
        assert_eq!(
            kinds,
            [ComponentKind::Destruction, ComponentKind::Singleton]
        );
    }

    #[test]
    fn components_reject_mixed_and_non_simple() {
        let err = components(&[cmd(D, "/a", Value::Empty), cmd(B, "/a/x", fv("f1"))]);
        assert!(matches!(err, Err(OrderError::MixedPairs { .. })));
        let err = components(&[cmd(B, "/a", Value::Dir), cmd(D, "/a", Value::Empty)]);
        assert!(matches!(err, Err(OrderError::NotSimple(_))));
        let err = components(&[cmd(D, "/a", Value::Dir)]);
        assert!(matches!(err, Err(OrderError::NotSimple(_))));
    }

    #[test]
    fn canonical_examples() {
        let bd = cmd(B, "/a", Value::Dir);
        let bf = cmd(B, "/a/x", fv("f1"));
        assert_eq!(
            order_canonical(&[bf.clone(), bd.clone()]).unwrap(),
            vec![bd, bf].into()
        );
        let fb = cmd(F, "/a/x", Value::Empty);
        let db = cmd(D, "/a", Value::Empty);
        assert_eq!(
            order_canonical(&[db.clone(), fb.clone()]).unwrap(),
            vec![fb, db].into()
        );
        let a = cmd(B, "/a", fv("f1"));
        let b = cmd(B, "/b", fv("f2"));
        assert_eq!(
            order_canonical(&[b.clone(), a.clone()]).unwrap(),
            vec![a, b].into()
        );
        let err = order_canonical(&[cmd(D, "/a", Value::Empty), cmd(B, "/a/x", fv("f1"))]);
        assert!(matches!(err, Err(OrderError::NoValidOrder { .. })));
    }

    #[test]
    fn canonical_destruction_is_postorder() {
        let set = [
            cmd(D, "/a", fv("f9")),
            cmd(D, "/a/x", Value::Empty),
            cmd(F, "/a/x/y", Value::Empty),
            cmd(F, "/a/z", Value::Empty),
        ];
        let order: Vec<String> = order_canonical(&set)
            .unwrap()
            .iter()
            .map(|c| c.node().to_string())
            .collect();
        assert_eq!(order, ["/a/x/y", "/a/x", "/a/z", "/a"]);
    }

    #[test]
    fn gap_has_no_valid_order() {
        let err = order_canonical(&[cmd(B, "/a", Value::Dir), cmd(B, "/a/x/y", fv("f1"))]);
        assert!(matches!(err, Err(OrderError::NoValidOrder { .. })));
    }

    #[test]
    fn enumerate_examples() {
        let a = cmd(B, "/a", fv("f1"));
        let b = cmd(B, "/b", fv("f2"));
        assert_eq!(
            enumerate_orders(&[a.clone(), b.clone()], 10).unwrap().len(),
            2
        );
        let bd = cmd(B, "/a", Value::Dir);
        let bf = cmd(B, "/a/x", fv("f1"));
        assert_eq!(
            enumerate_orders(&[bf.clone(), bd.clone()], 10).unwrap(),
            vec![CommandSequence::from(vec![bd, bf])]
        );
        assert_eq!(
            enumerate_orders(&[], 10).unwrap(),
            vec![CommandSequence::empty()]
        );
        assert_eq!(enumerate_orders(&[a, b], 1).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_interleaves_components() {
        let set = [
            cmd(B, "/a", Value::Dir),
            cmd(B, "/a/x", fv("f1")),
            cmd(F, "/b", Value::Empty),
        ];
        // /b can go before, between or after the construction pair
        let orders = enumerate_orders(&set, 100).unwrap();
        assert_eq!(orders.len(), 3);
        assert!(orders.iter().all(|o| is_valid_order(o.commands())));
        assert!(orders.contains(&order_canonical(&set).unwrap()));
    }

    #[test]
    fn valid_order_examples() {
        let bd = cmd(B, "/a", Value::Dir);
        let bf = cmd(B, "/a/x", fv("f1"));
        assert!(is_valid_order(&[bd.clone(), bf.clone()]));
        assert!(!is_valid_order(&[bf, bd]));
        assert!(is_valid_order(&[]));
    }
}
