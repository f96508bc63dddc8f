//! Filesystem namespace, value domain, commands and their effect.
//!
//! A working filesystem maps every node of the namespace forest to a value.
//! Only non-empty values are stored; any node that is not stored reads as
//! [`Value::Empty`]. A filesystem that has been broken by an inapplicable
//! command is represented by [`Filesystem::broken`] and absorbs every further
//! command.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::ModelError;

/// A node of the namespace forest, i.e. a path of one or more segments.
///
/// Paths are compared segment by segment, each segment bytewise. With this
/// ordering every node sorts immediately before all of its descendants, and
/// the descendants of a node form one contiguous range.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodePath {
    segments: Arc<[String]>,
}

impl NodePath {
    pub fn new<I, S>(segments: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(ModelError::InvalidPath(
                "a node needs at least one segment".into(),
            ));
        }
        for seg in &segments {
            validate_segment(seg)?;
        }
        Ok(NodePath {
            segments: segments.into(),
        })
    }

    /// Parses an unencoded path such as `/a/x`.
    pub fn parse(path: &str) -> Result<Self, ModelError> {
        let rest = path
            .strip_prefix('/')
            .ok_or_else(|| ModelError::InvalidPath(format!("{path:?} does not start with '/'")))?;
        NodePath::new(rest.split('/'))
    }

    /// Parses a path written with [`NodePath::encoded`].
    pub fn from_encoded(text: &str) -> Result<Self, ModelError> {
        let rest = text
            .strip_prefix('/')
            .ok_or_else(|| ModelError::InvalidPath(format!("{text:?} does not start with '/'")))?;
        let segments = rest
            .split('/')
            .map(percent_decode)
            .collect::<Result<Vec<_>, _>>()?;
        NodePath::new(segments)
    }

    /// The path with space, `%` and control bytes percent-encoded, so that it
    /// never contains whitespace.
    pub fn encoded(&self) -> String {
        let mut out = String::new();
        for seg in self.segments.iter() {
            out.push('/');
            for ch in seg.chars() {
                if ch == ' ' || ch == '%' || ch.is_ascii_control() {
                    out.push_str(&format!("%{:02X}", ch as u32));
                } else {
                    out.push(ch);
                }
            }
        }
        out
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    /// The parent node, or `None` for a root (the `⊤` sentinel).
    pub fn parent(&self) -> Option<NodePath> {
        if self.segments.len() == 1 {
            None
        } else {
            Some(NodePath {
                segments: self.segments[..self.segments.len() - 1].into(),
            })
        }
    }

    pub fn child(&self, segment: impl Into<String>) -> Result<NodePath, ModelError> {
        let segment = segment.into();
        validate_segment(&segment)?;
        let mut segments = self.segments.to_vec();
        segments.push(segment);
        Ok(NodePath {
            segments: segments.into(),
        })
    }

    /// Iterates over the strict ancestors, nearest first.
    pub fn ancestors(&self) -> impl Iterator<Item = NodePath> + '_ {
        (1..self.segments.len()).rev().map(move |len| NodePath {
            segments: self.segments[..len].into(),
        })
    }

    /// True iff `self` is a strict ancestor of `other`.
    pub fn is_ancestor_of(&self, other: &NodePath) -> bool {
        self.segments.len() < other.segments.len()
            && other.segments[..self.segments.len()] == self.segments[..]
    }

    pub fn relation(&self, other: &NodePath) -> NodeRelation {
        if self == other {
            NodeRelation::Equal
        } else if self.is_ancestor_of(other) {
            NodeRelation::Ancestor
        } else if other.is_ancestor_of(self) {
            NodeRelation::Descendant
        } else {
            NodeRelation::Incomparable
        }
    }

    /// Like [`NodePath::relation`] but separates direct parents and children
    /// from more distant relatives.
    pub fn kinship(&self, other: &NodePath) -> Kinship {
        match self.relation(other) {
            NodeRelation::Equal => Kinship::Equal,
            NodeRelation::Incomparable => Kinship::Incomparable,
            NodeRelation::Ancestor if other.depth() == self.depth() + 1 => Kinship::Parent,
            NodeRelation::Ancestor => Kinship::DistantAncestor,
            NodeRelation::Descendant if self.depth() == other.depth() + 1 => Kinship::Child,
            NodeRelation::Descendant => Kinship::DistantDescendant,
        }
    }
}

fn validate_segment(seg: &str) -> Result<(), ModelError> {
    if seg.is_empty() {
        return Err(ModelError::InvalidPath("empty path segment".into()));
    }
    if seg.contains('/') || seg.contains('\0') {
        return Err(ModelError::InvalidPath(format!(
            "segment {seg:?} contains '/' or NUL"
        )));
    }
    Ok(())
}

fn percent_decode(seg: &str) -> Result<String, ModelError> {
    let bytes = seg.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = bytes
                .get(i + 1..i + 3)
                .and_then(|h| std::str::from_utf8(h).ok())
                .and_then(|h| u8::from_str_radix(h, 16).ok())
                .ok_or_else(|| ModelError::InvalidPath(format!("bad escape in {seg:?}")))?;
            out.push(hex);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| ModelError::InvalidPath(format!("{seg:?} is not UTF-8")))
}

impl Ord for NodePath {
    fn cmp(&self, other: &Self) -> Ordering {
        self.segments.cmp(&other.segments)
    }
}

impl PartialOrd for NodePath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encoded())
    }
}

impl fmt::Debug for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodePath({})", self.encoded())
    }
}

/// Parent of `n`, `None` standing for `⊤`.
pub fn parent(n: &NodePath) -> Option<NodePath> {
    n.parent()
}

/// How `n` relates to `m`.
pub fn node_relation(n: &NodePath, m: &NodePath) -> NodeRelation {
    n.relation(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRelation {
    Equal,
    /// The first node is a strict ancestor of the second.
    Ancestor,
    /// The first node is a strict descendant of the second.
    Descendant,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kinship {
    Equal,
    /// The first node is the parent of the second.
    Parent,
    /// The first node is a child of the second.
    Child,
    DistantAncestor,
    DistantDescendant,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HashAlgorithm {
    Sha256,
}

impl HashAlgorithm {
    pub fn tag(self) -> &'static str {
        match self {
            HashAlgorithm::Sha256 => "sha256",
        }
    }
}

/// Identity of file content: algorithm, digest and byte length.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentId {
    algorithm: HashAlgorithm,
    digest: [u8; 32],
    size: u64,
}

impl ContentId {
    /// Stand-in content used where any file value will do, e.g. as the
    /// output of an inverted command. No real content hashes to all zeroes.
    pub const PLACEHOLDER: ContentId = ContentId {
        algorithm: HashAlgorithm::Sha256,
        digest: [0; 32],
        size: 0,
    };

    pub fn new(algorithm: HashAlgorithm, digest: [u8; 32], size: u64) -> Self {
        ContentId {
            algorithm,
            digest,
            size,
        }
    }

    pub fn of_bytes(bytes: &[u8]) -> Self {
        ContentId {
            algorithm: HashAlgorithm::Sha256,
            digest: Sha256::digest(bytes).into(),
            size: bytes.len() as u64,
        }
    }

    pub fn algorithm(&self) -> HashAlgorithm {
        self.algorithm
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Parses the two whitespace-separated tokens `sha256:<hex>` and `<size>`.
    pub fn parse(hash: &str, size: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::InvalidContent(format!("{hash} {size}"));
        let hex_digest = hash.strip_prefix("sha256:").ok_or_else(bad)?;
        if hex_digest.len() != 64 || hex_digest.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(bad());
        }
        let mut digest = [0u8; 32];
        hex::decode_to_slice(hex_digest, &mut digest).map_err(|_| bad())?;
        if size.is_empty() || !size.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let size = size.parse().map_err(|_| bad())?;
        Ok(ContentId::new(HashAlgorithm::Sha256, digest, size))
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{} {}",
            self.algorithm.tag(),
            hex::encode(self.digest),
            self.size
        )
    }
}

impl fmt::Debug for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ContentId({}…/{})",
            &hex::encode(self.digest)[..8],
            self.size
        )
    }
}

/// The three types of values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTag {
    /// `b`: nothing stored at the node.
    Empty,
    /// `f`: a file.
    File,
    /// `d`: a directory.
    Dir,
}

impl TypeTag {
    pub const ALL: [TypeTag; 3] = [TypeTag::Empty, TypeTag::File, TypeTag::Dir];

    pub fn letter(self) -> char {
        match self {
            TypeTag::Empty => 'b',
            TypeTag::File => 'f',
            TypeTag::Dir => 'd',
        }
    }

    pub fn from_letter(c: char) -> Option<TypeTag> {
        match c {
            'b' => Some(TypeTag::Empty),
            'f' => Some(TypeTag::File),
            'd' => Some(TypeTag::Dir),
            _ => None,
        }
    }

    /// The only value of this type, for the singleton types.
    pub fn unique_value(self) -> Option<Value> {
        match self {
            TypeTag::Empty => Some(Value::Empty),
            TypeTag::Dir => Some(Value::Dir),
            TypeTag::File => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Empty,
    Dir,
    File(ContentId),
}

impl Value {
    pub fn tag(&self) -> TypeTag {
        match self {
            Value::Empty => TypeTag::Empty,
            Value::Dir => TypeTag::Dir,
            Value::File(_) => TypeTag::File,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Value::Empty)
    }
}

/// An assignment of values to nodes. May or may not have the tree property.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FsState {
    values: BTreeMap<NodePath, Value>,
}

static EMPTY: Value = Value::Empty;

impl FsState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (NodePath, Value)>>(entries: I) -> Self {
        let mut state = FsState::new();
        for (n, v) in entries {
            state.set(n, v);
        }
        state
    }

    pub fn get(&self, n: &NodePath) -> &Value {
        self.values.get(n).unwrap_or(&EMPTY)
    }

    pub fn set(&mut self, n: NodePath, v: Value) {
        if v.is_empty() {
            self.values.remove(&n);
        } else {
            self.values.insert(n, v);
        }
    }

    /// Non-empty nodes in path order.
    pub fn entries(&self) -> impl Iterator<Item = (&NodePath, &Value)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn has_nonempty_descendant(&self, n: &NodePath) -> bool {
        use std::ops::Bound::{Excluded, Unbounded};
        self.values
            .range((Excluded(n), Unbounded))
            .next()
            .is_some_and(|(m, _)| n.is_ancestor_of(m))
    }

    pub fn satisfies_tree_property(&self) -> bool {
        self.first_tree_violation().is_none()
    }

    fn first_tree_violation(&self) -> Option<&NodePath> {
        self.values.keys().find(|n| match n.parent() {
            Some(p) => *self.get(&p) != Value::Dir,
            None => false,
        })
    }
}

/// True iff every non-empty node that has a parent has a directory there.
pub fn check_tree_property(state: &FsState) -> bool {
    state.satisfies_tree_property()
}

/// A working filesystem (always with the tree property) or the broken state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filesystem(Option<FsState>);

impl Filesystem {
    pub const BROKEN: Filesystem = Filesystem(None);

    pub fn empty() -> Self {
        Filesystem(Some(FsState::new()))
    }

    pub fn broken() -> Self {
        Filesystem::BROKEN
    }

    pub fn new(state: FsState) -> Result<Self, ModelError> {
        if let Some(n) = state.first_tree_violation() {
            return Err(ModelError::TreeProperty(n.clone()));
        }
        Ok(Filesystem(Some(state)))
    }

    pub fn from_entries<I: IntoIterator<Item = (NodePath, Value)>>(
        entries: I,
    ) -> Result<Self, ModelError> {
        Filesystem::new(FsState::from_entries(entries))
    }

    pub fn is_broken(&self) -> bool {
        self.0.is_none()
    }

    pub fn state(&self) -> Option<&FsState> {
        self.0.as_ref()
    }

    pub fn into_state(self) -> Option<FsState> {
        self.0
    }

    /// Value at `n`, or `None` if broken.
    pub fn get(&self, n: &NodePath) -> Option<&Value> {
        self.0.as_ref().map(|s| s.get(n))
    }

    pub fn apply(&self, c: &Command) -> Filesystem {
        let mut next = self.clone();
        next.apply_in_place(c);
        next
    }

    pub fn apply_in_place(&mut self, c: &Command) {
        let Some(state) = self.0.as_mut() else {
            return;
        };
        let ok = state.get(&c.node).tag() == c.input
            && (c.value.is_empty() || c.node.parent().is_none_or(|p| *state.get(&p) == Value::Dir))
            && (c.value == Value::Dir || !state.has_nonempty_descendant(&c.node));
        if ok {
            state.set(c.node.clone(), c.value);
        } else {
            self.0 = None;
        }
    }

    pub fn apply_all<'a, I: IntoIterator<Item = &'a Command>>(&self, commands: I) -> Filesystem {
        let mut fs = self.clone();
        for c in commands {
            if fs.is_broken() {
                break;
            }
            fs.apply_in_place(c);
        }
        fs
    }

    pub fn apply_seq(&self, seq: &CommandSequence) -> Filesystem {
        if seq.breaks {
            return Filesystem::BROKEN;
        }
        self.apply_all(&seq.commands)
    }
}

pub fn apply_command(fs: &Filesystem, c: &Command) -> Filesystem {
    fs.apply(c)
}

pub fn apply_sequence(fs: &Filesystem, s: &CommandSequence) -> Filesystem {
    fs.apply_seq(s)
}

/// A regular command `XY(n, v)`: requires type `X` at `n` and stores `v`,
/// whose type is `Y`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Command {
    node: NodePath,
    input: TypeTag,
    output: TypeTag,
    value: Value,
}

impl Command {
    /// The output type is the type of `value`.
    pub fn new(input: TypeTag, node: NodePath, value: Value) -> Self {
        Command {
            output: value.tag(),
            node,
            input,
            value,
        }
    }

    pub fn node(&self) -> &NodePath {
        &self.node
    }

    pub fn input(&self) -> TypeTag {
        self.input
    }

    pub fn output(&self) -> TypeTag {
        self.output
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    /// `bb` and `dd` either break a filesystem or leave it unchanged.
    pub fn is_assertion(&self) -> bool {
        self.input == self.output && self.input != TypeTag::File
    }

    pub fn has_tags(&self, input: TypeTag, output: TypeTag) -> bool {
        self.input == input && self.output == output
    }

    /// Two-letter type code such as `bf`.
    pub fn code(&self) -> String {
        [self.input.letter(), self.output.letter()].iter().collect()
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code(), self.node)?;
        if let Value::File(id) = &self.value {
            write!(f, " {id}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.code(), self.node)?;
        if let Value::File(id) = &self.value {
            write!(f, ", {id:?}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for Command {
    type Err = ModelError;

    /// Parses `<xy> <path> [sha256:<hex> <size>]`.
    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidCommand(line.to_string());
        let mut tokens = line.split(' ');
        let code = tokens.next().ok_or_else(bad)?;
        let mut letters = code.chars();
        let (Some(x), Some(y), None) = (letters.next(), letters.next(), letters.next()) else {
            return Err(bad());
        };
        let input = TypeTag::from_letter(x).ok_or_else(bad)?;
        let output = TypeTag::from_letter(y).ok_or_else(bad)?;
        let node = NodePath::from_encoded(tokens.next().ok_or_else(bad)?)?;
        let value = match output.unique_value() {
            Some(v) => v,
            None => {
                let hash = tokens.next().ok_or_else(bad)?;
                let size = tokens.next().ok_or_else(bad)?;
                Value::File(ContentId::parse(hash, size)?)
            }
        };
        if tokens.next().is_some() {
            return Err(bad());
        }
        Ok(Command::new(input, node, value))
    }
}

/// An ordered sequence of commands, applied left to right.
///
/// The break pseudo-command breaks every filesystem and absorbs everything
/// around it, so a sequence containing it is recorded by a flag instead of a
/// position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CommandSequence {
    commands: Vec<Command>,
    breaks: bool,
}

impl CommandSequence {
    pub fn new(commands: Vec<Command>) -> Self {
        CommandSequence {
            commands,
            breaks: false,
        }
    }

    /// The empty sequence `ε`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// The sequence consisting of the break pseudo-command.
    pub fn break_all() -> Self {
        CommandSequence {
            commands: Vec::new(),
            breaks: true,
        }
    }

    pub fn contains_break(&self) -> bool {
        self.breaks
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn into_commands(self) -> Vec<Command> {
        self.commands
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty() && !self.breaks
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Command> {
        self.commands.iter()
    }

    pub fn push(&mut self, c: Command) {
        self.commands.push(c);
    }

    pub fn concat(&self, other: &CommandSequence) -> CommandSequence {
        let mut commands = self.commands.clone();
        commands.extend(other.commands.iter().cloned());
        CommandSequence {
            commands,
            breaks: self.breaks || other.breaks,
        }
    }
}

impl From<Vec<Command>> for CommandSequence {
    fn from(commands: Vec<Command>) -> Self {
        CommandSequence::new(commands)
    }
}

impl FromIterator<Command> for CommandSequence {
    fn from_iter<I: IntoIterator<Item = Command>>(iter: I) -> Self {
        CommandSequence::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a CommandSequence {
    type Item = &'a Command;
    type IntoIter = std::slice::Iter<'a, Command>;

    fn into_iter(self) -> Self::IntoIter {
        self.commands.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NodePath {
        NodePath::parse(s).unwrap()
    }

    fn f(label: &str) -> Value {
        Value::File(ContentId::of_bytes(label.as_bytes()))
    }

    fn fs(entries: &[(&str, Value)]) -> Filesystem {
        Filesystem::from_entries(entries.iter().map(|(n, v)| (p(n), *v))).unwrap()
    }

    #[test]
    fn parent_drops_last_segment() {
        assert_eq!(parent(&p("/a/x")), Some(p("/a")));
        assert_eq!(parent(&p("/a")), None);
        assert_eq!(parent(&p("/a/x/y")), Some(p("/a/x")));
    }

    #[test]
    fn relations() {
        assert_eq!(node_relation(&p("/a"), &p("/a/x")), NodeRelation::Ancestor);
        assert_eq!(
            node_relation(&p("/a/x"), &p("/a/y")),
            NodeRelation::Incomparable
        );
        assert_eq!(node_relation(&p("/a"), &p("/a")), NodeRelation::Equal);
        assert_eq!(
            node_relation(&p("/a/x"), &p("/a")),
            NodeRelation::Descendant
        );
        // prefix of a segment is not an ancestor
        assert_eq!(
            node_relation(&p("/a"), &p("/ab")),
            NodeRelation::Incomparable
        );
        assert_eq!(p("/a").kinship(&p("/a/x/y")), Kinship::DistantAncestor);
        assert_eq!(p("/a/x").kinship(&p("/a")), Kinship::Child);
    }

    #[test]
    fn descendants_are_contiguous_in_order() {
        let mut paths = [
            p("/a!"),
            p("/a/x"),
            p("/b"),
            p("/a"),
            p("/a/x/y"),
            p("/a/y"),
        ];
        paths.sort();
        let shown: Vec<_> = paths.iter().map(|n| n.to_string()).collect();
        assert_eq!(shown, ["/a", "/a/x", "/a/x/y", "/a/y", "/a!", "/b"]);
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(NodePath::parse("a/x").is_err());
        assert!(NodePath::parse("/").is_err());
        assert!(NodePath::parse("/a//x").is_err());
        assert!(NodePath::new(Vec::<String>::new()).is_err());
        assert!(NodePath::from_encoded("/a%2Fb").is_err());
        assert!(NodePath::from_encoded("/a%zz").is_err());
    }

    #[test]
    fn encoding_round_trip() {
        let n = NodePath::new(["my dir", "100%", "tab\there"]).unwrap();
        assert_eq!(n.encoded(), "/my%20dir/100%25/tab%09here");
        assert_eq!(NodePath::from_encoded(&n.encoded()).unwrap(), n);
    }

    #[test]
    fn apply_command_examples() {
        let c = Command::new(TypeTag::Empty, p("/a"), f("f1"));
        assert_eq!(fs(&[]).apply(&c), fs(&[("/a", f("f1"))]));

        let c = Command::new(TypeTag::Empty, p("/a/x"), f("f1"));
        assert!(fs(&[]).apply(&c).is_broken());

        let db = Command::new(TypeTag::Dir, p("/a"), Value::Empty);
        assert!(fs(&[("/a", f("f1"))]).apply(&db).is_broken());
    }

    #[test]
    fn non_directory_over_children_breaks() {
        let base = fs(&[("/a", Value::Dir), ("/a/x", f("f1"))]);
        let df = Command::new(TypeTag::Dir, p("/a"), f("f2"));
        assert!(base.apply(&df).is_broken());
        let db = Command::new(TypeTag::Dir, p("/a"), Value::Empty);
        assert!(base.apply(&db).is_broken());
        let dd = Command::new(TypeTag::Dir, p("/a"), Value::Dir);
        assert_eq!(base.apply(&dd), base);
    }

    #[test]
    fn apply_sequence_examples() {
        let bd = Command::new(TypeTag::Empty, p("/a"), Value::Dir);
        let bf = Command::new(TypeTag::Empty, p("/a/x"), f("f1"));
        let start = fs(&[]);
        assert_eq!(start.apply_seq(&CommandSequence::empty()), start);
        assert_eq!(
            start.apply_seq(&vec![bd.clone(), bf.clone()].into()),
            fs(&[("/a", Value::Dir), ("/a/x", f("f1"))])
        );
        assert!(start.apply_seq(&vec![bf, bd].into()).is_broken());
        assert!(start.apply_seq(&CommandSequence::break_all()).is_broken());
    }

    #[test]
    fn tree_property_examples() {
        let ok = FsState::from_entries([(p("/a"), Value::Dir), (p("/a/x"), f("f1"))]);
        assert!(check_tree_property(&ok));
        let bad = FsState::from_entries([(p("/a"), f("f1")), (p("/a/x"), f("f2"))]);
        assert!(!check_tree_property(&bad));
        assert!(Filesystem::new(bad).is_err());
        assert!(check_tree_property(&FsState::new()));
    }

    #[test]
    fn broken_absorbs_and_compares_equal() {
        let c = Command::new(TypeTag::Empty, p("/a"), Value::Dir);
        assert_eq!(Filesystem::broken().apply(&c), Filesystem::broken());
        assert_ne!(Filesystem::broken(), Filesystem::empty());
    }

    #[test]
    fn command_text_round_trip() {
        let c = Command::new(TypeTag::File, p("/a b"), f("f1"));
        let text = c.to_string();
        assert!(text.starts_with("ff /a%20b sha256:"));
        assert_eq!(text.parse::<Command>().unwrap(), c);
        assert_eq!("db /a".parse::<Command>().unwrap().to_string(), "db /a");
        assert!("bf /a".parse::<Command>().is_err());
        assert!("bd /a extra".parse::<Command>().is_err());
        assert!("xd /a".parse::<Command>().is_err());
    }
}
