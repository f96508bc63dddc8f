//! Brute-force semantics over a small, finite space of filesystems.
//!
//! Every quantifier over "all filesystems" is evaluated over the members of
//! an [`FsSpace`]: all tree-respecting assignments of a fixed value alphabet
//! to a fixed node forest. This is the small-scope hypothesis; results say
//! nothing about forests or alphabets larger than the space.

use std::fmt;

use crate::algebra::{
    classify_pair, independence_of, is_construction_pair, is_destruction_pair, Classifier,
    PairClass,
};
use crate::detect::NodeForest;
use crate::model::{
    Command, CommandSequence, ContentId, Filesystem, FsState, Kinship, NodePath, TypeTag, Value,
};

/// The file value numbered `i` in generated alphabets (`f1`, `f2`, ...).
pub fn file_value(i: usize) -> Value {
    Value::File(ContentId::of_bytes(format!("f{i}").as_bytes()))
}

#[derive(Debug, Clone)]
pub struct FsSpace {
    forest: NodeForest,
    alphabet: Vec<Value>,
    all: Vec<Filesystem>,
}

impl FsSpace {
    /// Enumerates the space eagerly. The alphabet is deduplicated; `Empty`
    /// and `Dir` are always added.
    pub fn new(forest: NodeForest, alphabet: impl IntoIterator<Item = Value>) -> Self {
        let mut values = vec![Value::Empty, Value::Dir];
        for v in alphabet {
            if !values.contains(&v) {
                values.push(v);
            }
        }
        let nodes: Vec<NodePath> = forest.iter().cloned().collect();
        let mut all = Vec::new();
        let mut state = FsState::new();
        assign(&nodes, &values, &mut state, &mut all);
        FsSpace {
            forest,
            alphabet: values,
            all,
        }
    }

    /// Forest `{/a, /a/x, /a/x/y, /b}` with values `{b, d, f1, f2}`.
    pub fn default_space() -> Self {
        Self::shaped(3, 1, 2)
    }

    /// A chain of `depth` nodes below `/a`, `roots` further single-node
    /// trees, and `file_values` distinct file contents.
    pub fn shaped(depth: usize, roots: usize, file_values: usize) -> Self {
        let mut nodes = Vec::new();
        let mut segments: Vec<String> = Vec::new();
        for i in 0..depth {
            segments.push(match i {
                0 => "a".to_string(),
                1 => "x".to_string(),
                2 => "y".to_string(),
                3 => "z".to_string(),
                _ => format!("n{i}"),
            });
            nodes.push(NodePath::new(segments.clone()).expect("generated segment"));
        }
        for i in 0..roots {
            let name = if i < 24 {
                char::from(b'b' + i as u8).to_string()
            } else {
                format!("r{i}")
            };
            nodes.push(NodePath::new([name]).expect("generated segment"));
        }
        Self::new(
            NodeForest::closure(nodes),
            (1..=file_values).map(file_value),
        )
    }

    pub fn forest(&self) -> &NodeForest {
        &self.forest
    }

    pub fn alphabet(&self) -> &[Value] {
        &self.alphabet
    }

    /// Every member, in a deterministic order. Never contains `Broken`.
    pub fn filesystems(&self) -> &[Filesystem] {
        &self.all
    }

    pub fn enumerate(&self) -> impl Iterator<Item = &Filesystem> {
        self.all.iter()
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    /// Every command over the forest and alphabet, assertions included.
    pub fn commands(&self) -> Vec<Command> {
        let mut out = Vec::new();
        for n in self.forest.iter() {
            for input in TypeTag::ALL {
                for v in &self.alphabet {
                    out.push(Command::new(input, n.clone(), *v));
                }
            }
        }
        out
    }

    /// Commands that may appear in a simple sequence.
    pub fn non_assertion_commands(&self, n: &NodePath) -> Vec<Command> {
        let mut out = Vec::new();
        for input in TypeTag::ALL {
            for v in &self.alphabet {
                let c = Command::new(input, n.clone(), *v);
                if !c.is_assertion() {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Every simple command set of at most `max_len` commands, as sorted
    /// vectors.
    pub fn simple_sets(&self, max_len: usize) -> Vec<Vec<Command>> {
        let nodes: Vec<&NodePath> = self.forest.iter().collect();
        let options: Vec<Vec<Command>> = nodes
            .iter()
            .map(|n| self.non_assertion_commands(n))
            .collect();
        let mut out = Vec::new();
        let mut current = Vec::new();
        pick(&options, 0, max_len, &mut current, &mut out);
        out
    }

    /// `s1 ≡ s2`: same result on every member (breaking included).
    pub fn equivalent(&self, s1: &CommandSequence, s2: &CommandSequence) -> bool {
        self.all
            .iter()
            .all(|fs| fs.apply_seq(s1) == fs.apply_seq(s2))
    }

    /// `s1 ⊑ s2`: same result wherever `s1` does not break.
    pub fn extends(&self, s1: &CommandSequence, s2: &CommandSequence) -> bool {
        self.all.iter().all(|fs| {
            let r1 = fs.apply_seq(s1);
            r1.is_broken() || r1 == fs.apply_seq(s2)
        })
    }

    /// Some member is broken by none of the sequences.
    pub fn works(&self, seqs: &[CommandSequence]) -> bool {
        self.all
            .iter()
            .any(|fs| seqs.iter().all(|s| !fs.apply_seq(s).is_broken()))
    }

    pub fn breaks_everything(&self, s: &CommandSequence) -> bool {
        !self.works(std::slice::from_ref(s))
    }

    /// Every member that no condition breaks is broken by no consequent.
    pub fn works_conditional(
        &self,
        consequents: &[CommandSequence],
        conditions: &[CommandSequence],
    ) -> bool {
        self.all.iter().all(|fs| {
            conditions.iter().any(|s| fs.apply_seq(s).is_broken())
                || consequents.iter().all(|s| !fs.apply_seq(s).is_broken())
        })
    }

    /// Independence decided semantically: `ab ≡ ba` and `ab` works somewhere.
    pub fn semantically_independent(&self, a: &Command, b: &Command) -> bool {
        let ab = seq([a, b]);
        let ba = seq([b, a]);
        self.equivalent(&ab, &ba) && self.works(&[ab])
    }
}

fn assign(nodes: &[NodePath], values: &[Value], state: &mut FsState, out: &mut Vec<Filesystem>) {
    let Some((n, rest)) = nodes.split_first() else {
        out.push(Filesystem::new(state.clone()).expect("assignment respects the tree property"));
        return;
    };
    let parent_is_dir = n.parent().is_none_or(|p| *state.get(&p) == Value::Dir);
    if !parent_is_dir {
        assign(rest, values, state, out);
        return;
    }
    for v in values {
        state.set(n.clone(), *v);
        assign(rest, values, state, out);
    }
    state.set(n.clone(), Value::Empty);
}

fn pick(
    options: &[Vec<Command>],
    at: usize,
    left: usize,
    current: &mut Vec<Command>,
    out: &mut Vec<Vec<Command>>,
) {
    if at == options.len() {
        out.push(current.clone());
        return;
    }
    pick(options, at + 1, left, current, out);
    if left == 0 {
        return;
    }
    for c in &options[at] {
        current.push(c.clone());
        pick(options, at + 1, left - 1, current, out);
        current.pop();
    }
}

fn seq<'a>(cs: impl IntoIterator<Item = &'a Command>) -> CommandSequence {
    cs.into_iter().cloned().collect()
}

/// `fs1 ≗ fs2`: both broken, or the same type at every node.
pub fn type_equal(fs1: &Filesystem, fs2: &Filesystem) -> bool {
    match (fs1.state(), fs2.state()) {
        (None, None) => true,
        (Some(a), Some(b)) => {
            a.len() == b.len() && a.entries().all(|(n, v)| b.get(n).tag() == v.tag())
        }
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleStatus {
    Pass,
    Fail,
    /// No command pair in the space matches the side conditions.
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleOutcome {
    pub id: &'static str,
    pub instantiations: usize,
    pub failures: usize,
    /// The first few failing instantiations.
    pub examples: Vec<String>,
}

impl RuleOutcome {
    fn new(id: &'static str) -> Self {
        RuleOutcome {
            id,
            instantiations: 0,
            failures: 0,
            examples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instantiations += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < 5 {
                self.examples.push(describe());
            }
        }
    }

    pub fn status(&self) -> RuleStatus {
        if self.failures > 0 {
            RuleStatus::Fail
        } else if self.instantiations == 0 {
            RuleStatus::NotCovered
        } else {
            RuleStatus::Pass
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleReport {
    pub outcomes: Vec<RuleOutcome>,
}

impl RuleReport {
    pub fn get(&self, id: &str) -> Option<&RuleOutcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }

    pub fn total_failures(&self) -> usize {
        self.outcomes.iter().map(|o| o.failures).sum()
    }

    /// Every check instantiated at least once and never failed.
    pub fn is_clean(&self) -> bool {
        self.outcomes.iter().all(|o| o.status() == RuleStatus::Pass)
    }
}

impl fmt::Display for RuleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            write!(
                f,
                "RULE {} instantiations={} failures={}",
                o.id, o.instantiations, o.failures
            )?;
            if o.status() == RuleStatus::NotCovered {
                write!(f, " NOT_COVERED")?;
            }
            writeln!(f)?;
            for e in &o.examples {
                writeln!(f, "  counterexample: {e}")?;
            }
        }
        Ok(())
    }
}

/// Checks every pair rule, the construction and destruction pairs, the
/// independence characterization, and the full classification table
/// against brute-force semantics on `space`.
///
/// | id | instantiated by | claim |
/// |----|-----------------|-------|
/// | `1` | unrelated nodes | the pair commutes |
/// | `2` | unrelated nodes | the pair works somewhere |
/// | `3` | same node, first output ≠ second input | breaks everything |
/// | `4` | same node, back to the empty or directory type it started from | extended by `ε` |
/// | `5` | any other same-node pair | equivalent to one merged command |
/// | `6` | distant relatives, no `dd` above and no `bb` below | breaks in both orders |
/// | `7` | parent then child, not a construction pair | breaks everything |
/// | `8` | child then parent, not a destruction pair | breaks everything |
/// | `9` | `bb` below a command other than `dd` | the `bb` can be dropped, either order |
/// | `10` | `dd` above a command other than `bb` | the `dd` can be dropped, either order |
/// | `11` | a single `bb` or `dd` | extended by `ε` |
/// | `12` | pairs classified independent | the pair works wherever both commands do |
/// | `independent-iff-unrelated` | distinct non-assertion pairs | independent exactly when the nodes are unrelated |
/// | `construction`, `destruction` | the legal parent/child shapes | work in one order, break in the other |
/// | `independence` | every pair | claimed independence matches the semantic one |
/// | `table` | every pair | the semantic statement of its class holds |
pub fn verify_rules(space: &FsSpace) -> RuleReport {
    verify_rules_with(space, classify_pair)
}

/// As [`verify_rules`], with the classification under test supplied by the
/// caller. Each rule checks both the semantic claim and that `classifier`
/// puts the pair in the class the rule describes.
pub fn verify_rules_with(space: &FsSpace, classifier: Classifier) -> RuleReport {
    use TypeTag::{Dir as D, Empty as B};

    let ids = [
        "1",
        "2",
        "3",
        "4",
        "5",
        "6",
        "7",
        "8",
        "9",
        "10",
        "11",
        "12",
        "independent-iff-unrelated",
        "construction",
        "destruction",
        "independence",
        "table",
    ];
    let mut out: Vec<RuleOutcome> = ids.iter().map(|id| RuleOutcome::new(id)).collect();
    let idx = |id: &str| ids.iter().position(|x| *x == id).expect("known rule id");

    let commands = space.commands();
    let eps = CommandSequence::empty();

    for c in &commands {
        out[idx("11")].record(!c.is_assertion() || space.extends(&seq([c]), &eps), || {
            format!("{c}")
        });
    }

    for c1 in &commands {
        for c2 in &commands {
            let c12 = seq([c1, c2]);
            let c21 = seq([c2, c1]);
            let cls = classifier(c1, c2);
            let cls_rev = classifier(c2, c1);
            let kin = c1.node().kinship(c2.node());
            let name = || format!("{c1} ; {c2} classified {cls:?}");

            match kin {
                Kinship::Incomparable => {
                    out[idx("1")].record(
                        space.equivalent(&c12, &c21) && cls == PairClass::CommuteIncomparable,
                        name,
                    );
                    out[idx("2")].record(
                        space.works(std::slice::from_ref(&c12))
                            && cls == PairClass::CommuteIncomparable,
                        name,
                    );
                }
                Kinship::Equal => {
                    if c1.output() != c2.input() {
                        out[idx("3")].record(
                            space.breaks_everything(&c12) && cls == PairClass::BreaksAlways,
                            name,
                        );
                    } else if c1.input() == c2.output() && c1.input() != TypeTag::File {
                        out[idx("4")].record(
                            space.extends(&c12, &eps) && cls == PairClass::SimplifiesToEmpty,
                            name,
                        );
                    } else {
                        let merged = Command::new(c1.input(), c1.node().clone(), *c2.value());
                        out[idx("5")].record(
                            space.equivalent(&c12, &seq([&merged]))
                                && cls == PairClass::SimplifiesToSingle(merged.clone()),
                            name,
                        );
                    }
                }
                Kinship::DistantAncestor => {
                    if !c1.has_tags(D, D) && !c2.has_tags(B, B) {
                        out[idx("6")].record(
                            space.breaks_everything(&c12)
                                && space.breaks_everything(&c21)
                                && cls == PairClass::BreaksAlways
                                && cls_rev == PairClass::BreaksAlways,
                            name,
                        );
                    }
                }
                Kinship::Parent => {
                    if is_construction_pair(c1, c2) {
                        out[idx("construction")].record(
                            space.works(std::slice::from_ref(&c12))
                                && space.breaks_everything(&c21)
                                && cls == PairClass::ConstructionPair,
                            name,
                        );
                    } else if !c1.has_tags(D, D) && !c2.has_tags(B, B) {
                        out[idx("7")].record(
                            space.breaks_everything(&c12) && cls == PairClass::BreaksAlways,
                            name,
                        );
                    }
                }
                Kinship::Child => {
                    if is_destruction_pair(c1, c2) {
                        out[idx("destruction")].record(
                            space.works(std::slice::from_ref(&c12))
                                && space.breaks_everything(&c21)
                                && cls == PairClass::DestructionPair,
                            name,
                        );
                    } else if !c1.has_tags(B, B) && !c2.has_tags(D, D) {
                        out[idx("8")].record(
                            space.breaks_everything(&c12) && cls == PairClass::BreaksAlways,
                            name,
                        );
                    }
                }
                Kinship::DistantDescendant => {}
            }

            // bb below an ancestor command that is not dd
            if c1.has_tags(B, B) && c2.node().is_ancestor_of(c1.node()) && !c2.has_tags(D, D) {
                let only = seq([c2]);
                out[idx("9")].record(
                    space.equivalent(&c12, &only)
                        && space.equivalent(&c21, &only)
                        && cls == PairClass::AssertionAbsorbed
                        && cls_rev == PairClass::AssertionAbsorbed,
                    name,
                );
            }
            // dd above a descendant command that is not bb
            if c1.has_tags(D, D) && c1.node().is_ancestor_of(c2.node()) && !c2.has_tags(B, B) {
                let only = seq([c2]);
                out[idx("10")].record(
                    space.equivalent(&c12, &only)
                        && space.equivalent(&c21, &only)
                        && cls == PairClass::AssertionAbsorbed
                        && cls_rev == PairClass::AssertionAbsorbed,
                    name,
                );
            }

            let sem_indep = space.semantically_independent(c1, c2);
            let claimed_indep = independence_of(&cls, c1, c2);
            if claimed_indep {
                out[idx("12")].record(
                    space.works_conditional(std::slice::from_ref(&c12), &[seq([c1]), seq([c2])]),
                    name,
                );
            }
            if c1 != c2 && !c1.is_assertion() && !c2.is_assertion() {
                let incomparable = kin == Kinship::Incomparable;
                out[idx("independent-iff-unrelated")].record(
                    sem_indep == incomparable && claimed_indep == sem_indep,
                    name,
                );
            }
            out[idx("independence")].record(claimed_indep == sem_indep, || {
                format!("{c1} ; {c2} claimed independent={claimed_indep}, semantic={sem_indep}")
            });
            out[idx("table")].record(class_claim_holds(space, c1, c2, &cls), name);
        }
    }

    RuleReport { outcomes: out }
}

/// The semantic statement each class makes about `first·second`.
fn class_claim_holds(space: &FsSpace, first: &Command, second: &Command, cls: &PairClass) -> bool {
    let c12 = seq([first, second]);
    let c21 = seq([second, first]);
    let works = |s: &CommandSequence| space.works(std::slice::from_ref(s));
    match cls {
        PairClass::CommuteIncomparable => space.equivalent(&c12, &c21) && works(&c12),
        PairClass::BreaksAlways => space.breaks_everything(&c12),
        PairClass::SimplifiesToEmpty => {
            works(&c12) && space.extends(&c12, &CommandSequence::empty())
        }
        PairClass::SimplifiesToSingle(c) => space.equivalent(&c12, &seq([c])),
        PairClass::ConstructionPair | PairClass::DestructionPair => {
            works(&c12) && space.breaks_everything(&c21)
        }
        PairClass::AssertionAbsorbed => {
            let reduced = match (first.is_assertion(), second.is_assertion()) {
                (true, true) => CommandSequence::empty(),
                (true, false) => seq([second]),
                (false, true) => seq([first]),
                (false, false) => return false,
            };
            space.equivalent(&c12, &c21) && works(&c12) && space.extends(&c12, &reduced)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TypeTag::{Dir as D, Empty as B, File as F};

    fn p(s: &str) -> NodePath {
        NodePath::parse(s).unwrap()
    }

    fn cmd(input: TypeTag, node: &str, value: Value) -> Command {
        Command::new(input, p(node), value)
    }

    fn one_node() -> FsSpace {
        FsSpace::shaped(1, 0, 2)
    }

    fn s(cs: &[Command]) -> CommandSequence {
        cs.to_vec().into()
    }

    #[test]
    fn enumeration_counts() {
        let chain = FsSpace::new(NodeForest::closure([p("/a/x")]), [file_value(1)]);
        assert_eq!(chain.len(), 5);
        assert_eq!(one_node().len(), 4);
        let roots = FsSpace::new(NodeForest::closure([p("/a"), p("/b")]), [file_value(1)]);
        assert_eq!(roots.len(), 9);
        assert_eq!(FsSpace::default_space().len(), 40);
        assert!(FsSpace::default_space()
            .enumerate()
            .all(|fs| fs.state().unwrap().satisfies_tree_property()));
    }

    #[test]
    fn equivalence_examples() {
        let sp = one_node();
        let (f1, f2) = (file_value(1), file_value(2));
        assert!(sp.equivalent(&s(&[]), &s(&[])));
        assert!(sp.equivalent(
            &s(&[cmd(B, "/a", f1), cmd(F, "/a", f2)]),
            &s(&[cmd(B, "/a", f2)])
        ));
        assert!(!sp.equivalent(&s(&[cmd(B, "/a", Value::Dir)]), &s(&[cmd(B, "/a", f1)])));
    }

    #[test]
    fn extension_examples() {
        let sp = one_node();
        let f1 = file_value(1);
        assert!(sp.extends(&s(&[cmd(B, "/a", f1), cmd(F, "/a", Value::Empty)]), &s(&[])));
        assert!(sp.extends(&s(&[cmd(B, "/a", Value::Empty)]), &s(&[])));
        assert!(!sp.extends(&s(&[]), &s(&[cmd(B, "/a", f1)])));
    }

    #[test]
    fn works_examples() {
        let sp = one_node();
        let (f1, f2) = (file_value(1), file_value(2));
        let bf1 = s(&[cmd(B, "/a", f1)]);
        assert!(sp.works(std::slice::from_ref(&bf1)));
        assert!(sp.works(&[bf1.clone(), s(&[cmd(B, "/a", Value::Dir)])]));
        assert!(!sp.works(&[bf1.clone(), s(&[cmd(F, "/a", Value::Empty)])]));

        assert!(sp.works_conditional(std::slice::from_ref(&bf1), &[CommandSequence::break_all()]));
        assert!(sp.works_conditional(std::slice::from_ref(&bf1), &[s(&[cmd(B, "/a", f2)])]));
        assert!(!sp.works_conditional(&[s(&[cmd(F, "/a", Value::Empty)])], &[bf1]));
    }

    #[test]
    fn type_equality_examples() {
        let at = |v: Value| Filesystem::from_entries([(p("/a"), v)]).unwrap();
        assert!(type_equal(&Filesystem::broken(), &Filesystem::broken()));
        assert!(type_equal(&at(file_value(1)), &at(file_value(2))));
        assert!(!type_equal(&at(file_value(1)), &at(Value::Dir)));
        assert!(!type_equal(&at(Value::Dir), &Filesystem::broken()));
    }

    #[test]
    fn default_space_is_clean() {
        let report = verify_rules(&FsSpace::default_space());
        assert!(report.is_clean(), "{report}");
        assert_eq!(report.outcomes.len(), 17);
    }

    #[test]
    fn missing_three_chain_is_not_covered() {
        let report = verify_rules(&FsSpace::shaped(2, 1, 2));
        assert_eq!(report.get("6").unwrap().status(), RuleStatus::NotCovered);
        assert_eq!(report.total_failures(), 0);
        assert!(!report.is_clean());
        assert!(report
            .to_string()
            .contains("RULE 6 instantiations=0 failures=0 NOT_COVERED"));
    }

    fn lenient(first: &Command, second: &Command) -> PairClass {
        match classify_pair(first, second) {
            PairClass::BreaksAlways => PairClass::CommuteIncomparable,
            other => other,
        }
    }

    #[test]
    fn corrupted_classifier_is_caught() {
        let report = verify_rules_with(&FsSpace::default_space(), lenient);
        assert!(report.total_failures() > 0);
        assert!(report.get("3").unwrap().failures > 0);
        assert!(report.get("table").unwrap().failures > 0);
    }

    #[test]
    fn report_lines() {
        let text = verify_rules(&FsSpace::shaped(1, 1, 2)).to_string();
        assert!(text
            .lines()
            .any(|l| l.starts_with("RULE 1 instantiations=") && l.ends_with("failures=0")));
    }

    #[test]
    fn simple_set_count() {
        // 10 non-assertion commands per node, 4 nodes
        assert_eq!(
            FsSpace::default_space().simple_sets(4).len(),
            11usize.pow(4)
        );
        assert_eq!(one_node().simple_sets(1).len(), 11);
        assert_eq!(FsSpace::default_space().simple_sets(1).len(), 41);
    }

    #[test]
    fn value_distinct_writes_are_dependent() {
        let sp = one_node();
        let a = cmd(B, "/a", file_value(1));
        let b = cmd(F, "/a", file_value(2));
        assert!(!sp.semantically_independent(&a, &b));
        assert!(!crate::algebra::independent(&a, &b));
    }

    #[test]
    fn inverse_restores_types() {
        let sp = FsSpace::default_space();
        for c in sp.commands() {
            let inv = crate::algebra::inverse(&c);
            for fs in sp.enumerate() {
                let after = fs.apply(&c);
                if !after.is_broken() {
                    assert!(type_equal(&after.apply(&inv), fs), "{c} then {inv}");
                }
            }
        }
        let _ = D;
    }
}
