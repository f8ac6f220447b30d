//! Joint syntacto-discourse trees and their span views.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// A token of the input document.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Token {
    pub index: usize,
    pub text: String,
}

impl Token {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        Token {
            index,
            text: text.into(),
        }
    }
}

/// Builds a token list from plain words, numbering them from zero.
pub fn tokens_from_words<S: AsRef<str>>(words: &[S]) -> Vec<Token> {
    words
        .iter()
        .enumerate()
        .map(|(index, w)| Token::new(index, w.as_ref()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("empty label")]
    Empty,
    #[error("invalid character in label {0:?}")]
    InvalidCharacter(String),
    #[error("malformed label {0:?}")]
    Malformed(String),
}

fn check_atom(s: &str) -> Result<(), LabelError> {
    if s.is_empty() {
        return Err(LabelError::Empty);
    }
    if s
        .chars()
        .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '+' | '<' | '>'))
    {
        return Err(LabelError::InvalidCharacter(s.to_string()));
    }
    Ok(())
}

/// A constituency label, possibly a collapsed unary chain (outermost first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SyntacticLabel {
    chain: Vec<String>,
}

impl SyntacticLabel {
    /// A single nonterminal.
    pub fn new(nonterminal: impl Into<String>) -> Result<Self, LabelError> {
        Self::from_chain(alloc::vec![nonterminal.into()])
    }

    pub fn from_chain(chain: Vec<String>) -> Result<Self, LabelError> {
        if chain.is_empty() {
            return Err(LabelError::Empty);
        }
        for part in &chain {
            check_atom(part)?;
        }
        Ok(SyntacticLabel { chain })
    }

    pub fn parts(&self) -> &[String] {
        &self.chain
    }

    pub fn is_chain(&self) -> bool {
        self.chain.len() > 1
    }

    /// Appends `inner` below this label.
    pub fn extend_with(&mut self, inner: &SyntacticLabel) {
        self.chain.extend(inner.chain.iter().cloned());
    }
}

impl fmt::Display for SyntacticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, part) in self.chain.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            f.write_str(part)?;
        }
        Ok(())
    }
}

/// Nucleus/satellite arrangement of a discourse node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Nuclearity {
    /// Satellite on the left, nucleus on the right: `Rel->`.
    SatelliteThenNucleus,
    /// Nucleus on the left, satellite on the right: `<-Rel`.
    NucleusThenSatellite,
    /// Conjunctive node, every child a nucleus: `<>Rel`.
    MultiNuclear,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DiscourseLabel {
    pub relation: String,
    pub form: Nuclearity,
}

impl DiscourseLabel {
    pub fn new(relation: impl Into<String>, form: Nuclearity) -> Result<Self, LabelError> {
        let relation = relation.into();
        check_atom(&relation)?;
        Ok(DiscourseLabel { relation, form })
    }
}

impl fmt::Display for DiscourseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            Nuclearity::SatelliteThenNucleus => write!(f, "{}->", self.relation),
            Nuclearity::NucleusThenSatellite => write!(f, "<-{}", self.relation),
            Nuclearity::MultiNuclear => write!(f, "<>{}", self.relation),
        }
    }
}

/// Which layer of the joint tree a label belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Syntactic,
    Discourse,
}

/// Label of an internal node or of a labeled span.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Label {
    Syntactic(SyntacticLabel),
    Discourse(DiscourseLabel),
}

impl Label {
    /// Shorthand for a single-nonterminal syntactic label.
    ///
    /// Panics if `nonterminal` is not a valid label atom.
    pub fn nt(nonterminal: &str) -> Label {
        Label::Syntactic(SyntacticLabel::new(nonterminal).expect("valid nonterminal"))
    }

    /// Shorthand for a discourse label. Panics on an invalid relation name.
    pub fn rel(relation: &str, form: Nuclearity) -> Label {
        Label::Discourse(DiscourseLabel::new(relation, form).expect("valid relation"))
    }

    pub fn level(&self) -> Level {
        match self {
            Label::Syntactic(_) => Level::Syntactic,
            Label::Discourse(_) => Level::Discourse,
        }
    }

    pub fn is_discourse(&self) -> bool {
        matches!(self, Label::Discourse(_))
    }

    pub fn as_discourse(&self) -> Option<&DiscourseLabel> {
        match self {
            Label::Discourse(d) => Some(d),
            Label::Syntactic(_) => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Syntactic(s) => s.fmt(f),
            Label::Discourse(d) => d.fmt(f),
        }
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(LabelError::Empty);
        }
        if let Some(rel) = s.strip_prefix("<-") {
            return DiscourseLabel::new(rel, Nuclearity::NucleusThenSatellite).map(Label::Discourse);
        }
        if let Some(rel) = s.strip_prefix("<>") {
            return DiscourseLabel::new(rel, Nuclearity::MultiNuclear).map(Label::Discourse);
        }
        if let Some(rel) = s.strip_suffix("->") {
            return DiscourseLabel::new(rel, Nuclearity::SatelliteThenNucleus).map(Label::Discourse);
        }
        if s.starts_with('<') {
            return Err(LabelError::Malformed(s.to_string()));
        }
        let chain = s.split('+').map(String::from).collect();
        SyntacticLabel::from_chain(chain).map(Label::Syntactic)
    }
}

/// A node of a joint tree. Leaves refer to token positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(usize),
    Internal { label: Label, children: Vec<Node> },
}

impl Node {
    pub fn internal(label: Label, children: Vec<Node>) -> Node {
        Node::Internal { label, children }
    }

    pub fn label(&self) -> Option<&Label> {
        match self {
            Node::Leaf(_) => None,
            Node::Internal { label, .. } => Some(label),
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Leaf(_) => &[],
            Node::Internal { children, .. } => children,
        }
    }

    pub fn is_discourse(&self) -> bool {
        self.label().is_some_and(Label::is_discourse)
    }

    /// Token extent `[start, end)`. Assumes the node has at least one leaf.
    pub fn span(&self) -> (usize, usize) {
        (self.first_leaf(), self.last_leaf() + 1)
    }

    fn first_leaf(&self) -> usize {
        match self {
            Node::Leaf(i) => *i,
            Node::Internal { children, .. } => children[0].first_leaf(),
        }
    }

    fn last_leaf(&self) -> usize {
        match self {
            Node::Leaf(i) => *i,
            Node::Internal { children, .. } => children[children.len() - 1].last_leaf(),
        }
    }

    /// Leaf indices in order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Node::Leaf(i) => out.push(*i),
            Node::Internal { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// Shifts every leaf index by `offset`.
    pub fn shifted(&self, offset: usize) -> Node {
        match self {
            Node::Leaf(i) => Node::Leaf(i + offset),
            Node::Internal { label, children } => Node::Internal {
                label: label.clone(),
                children: children.iter().map(|c| c.shifted(offset)).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("document has no tokens")]
    EmptyDocument,
    #[error("token {position} has index {found}")]
    TokenIndex { position: usize, found: usize },
    #[error("token {0} has empty text or contains whitespace")]
    TokenText(usize),
    #[error("leaf {position} refers to token {found}")]
    LeafOrder { position: usize, found: usize },
    #[error("tree has {leaves} leaves for {tokens} tokens")]
    LeafCount { leaves: usize, tokens: usize },
    #[error("internal node without children")]
    EmptyConstituent,
    #[error("the root must be an internal node")]
    LeafRoot,
    #[error("label chain {0} on a tree node; chains must be expanded into unary nodes")]
    ChainInTree(String),
    #[error("unary node {0} over another internal node mixes discourse and syntax")]
    MixedUnary(String),
    #[error("discourse node {label} at [{start}, {end}) is below a syntactic node")]
    Layering {
        label: String,
        start: usize,
        end: usize,
    },
    #[error("discourse node {label} has {children} children")]
    DiscourseArity { label: String, children: usize },
}

/// An ordered tree over a token sequence.
///
/// [`JointTree::new`] checks the structural invariants every consumer relies
/// on (leaf order, non-empty constituents, single-nonterminal node labels).
/// [`JointTree::validate`] additionally checks the layering and arity rules of
/// well-formed joint trees; parser output is only guaranteed the former.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointTree {
    tokens: Vec<Token>,
    root: Node,
}

impl JointTree {
    pub fn new(tokens: Vec<Token>, root: Node) -> Result<Self, TreeError> {
        if tokens.is_empty() {
            return Err(TreeError::EmptyDocument);
        }
        for (position, t) in tokens.iter().enumerate() {
            if t.index != position {
                return Err(TreeError::TokenIndex {
                    position,
                    found: t.index,
                });
            }
            if t.text.is_empty() || t.text.chars().any(char::is_whitespace) {
                return Err(TreeError::TokenText(position));
            }
        }
        if matches!(root, Node::Leaf(_)) {
            return Err(TreeError::LeafRoot);
        }
        check_structure(&root)?;
        let leaves = root.leaves();
        if leaves.len() != tokens.len() {
            return Err(TreeError::LeafCount {
                leaves: leaves.len(),
                tokens: tokens.len(),
            });
        }
        for (position, &found) in leaves.iter().enumerate() {
            if found != position {
                return Err(TreeError::LeafOrder { position, found });
            }
        }
        Ok(JointTree { tokens, root })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn into_parts(self) -> (Vec<Token>, Node) {
        (self.tokens, self.root)
    }

    /// Checks layering (no discourse node below a syntactic node) and
    /// discourse arity (binary for mononuclear, at least two children for
    /// multinuclear nodes).
    pub fn validate(&self) -> Result<(), TreeError> {
        fn walk(node: &Node, under_syntax: bool) -> Result<(), TreeError> {
            let Node::Internal { label, children } = node else {
                return Ok(());
            };
            match label {
                Label::Discourse(d) => {
                    if under_syntax {
                        let (start, end) = node.span();
                        return Err(TreeError::Layering {
                            label: d.to_string(),
                            start,
                            end,
                        });
                    }
                    let ok = match d.form {
                        Nuclearity::MultiNuclear => children.len() >= 2,
                        _ => children.len() == 2,
                    };
                    if !ok {
                        return Err(TreeError::DiscourseArity {
                            label: d.to_string(),
                            children: children.len(),
                        });
                    }
                    children.iter().try_for_each(|c| walk(c, false))
                }
                Label::Syntactic(_) => children.iter().try_for_each(|c| walk(c, true)),
            }
        }
        walk(&self.root, false)
    }

    /// Number of discourse-labeled nodes.
    pub fn discourse_node_count(&self) -> usize {
        fn count(node: &Node) -> usize {
            let own = usize::from(node.is_discourse());
            own + node.children().iter().map(count).sum::<usize>()
        }
        count(&self.root)
    }
}

fn check_structure(node: &Node) -> Result<(), TreeError> {
    let Node::Internal { label, children } = node else {
        return Ok(());
    };
    if children.is_empty() {
        return Err(TreeError::EmptyConstituent);
    }
    if let Label::Syntactic(s) = label {
        if s.is_chain() {
            return Err(TreeError::ChainInTree(s.to_string()));
        }
    }
    if let [child @ Node::Internal { label: inner, .. }] = children.as_slice() {
        if label.is_discourse() || inner.is_discourse() {
            return Err(TreeError::MixedUnary(label.to_string()));
        }
        return check_structure(child);
    }
    children.iter().try_for_each(check_structure)
}

/// A labeled bracket `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledSpan {
    pub start: usize,
    pub end: usize,
    pub label: Label,
}

impl LabeledSpan {
    pub fn new(start: usize, end: usize, label: Label) -> Self {
        LabeledSpan { start, end, label }
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn width(&self) -> usize {
        self.end - self.start
    }
}

impl fmt::Display for LabeledSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.start, self.end, self.label)
    }
}

/// Follows a chain of unary syntactic nodes down from `node`, returning the
/// joined label and the children of the lowest node in the chain. `None` for
/// leaves.
pub fn collapse_unary(node: &Node) -> Option<(Label, &[Node])> {
    let Node::Internal { label, children } = node else {
        return None;
    };
    let mut label = label.clone();
    let mut children = children.as_slice();
    while let [Node::Internal {
        label: Label::Syntactic(inner),
        children: grand,
    }] = children
    {
        // JointTree::new rules out unary links that touch a discourse node
        if let Label::Syntactic(outer) = &mut label {
            outer.extend_with(inner);
        }
        children = grand;
    }
    Some((label, children))
}

/// One labeled span per internal node, with same-extent unary chains
/// collapsed into a single `+`-joined label. Sorted by `(start, end, label)`.
pub fn labeled_spans(tree: &JointTree) -> Vec<LabeledSpan> {
    fn walk(node: &Node, out: &mut Vec<LabeledSpan>) {
        let Some((label, children)) = collapse_unary(node) else {
            return;
        };
        let (start, end) = node.span();
        out.push(LabeledSpan { start, end, label });
        for c in children {
            walk(c, out);
        }
    }
    let mut out = Vec::new();
    walk(tree.root(), &mut out);
    out.sort();
    out
}

/// A contiguous EDU `[start, end)` over token positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EduSpan {
    pub start: usize,
    pub end: usize,
}

impl EduSpan {
    pub fn new(start: usize, end: usize) -> Self {
        EduSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

impl fmt::Display for EduSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

/// True when `edus` tile `[0, n)` in order, without gaps, overlaps or empty
/// units.
pub fn edus_tile(edus: &[EduSpan], n: usize) -> bool {
    let mut at = 0;
    for e in edus {
        if e.start != at || e.is_empty() {
            return false;
        }
        at = e.end;
    }
    at == n && !edus.is_empty()
}

/// EDU segmentation of a joint tree: the extents of the non-discourse
/// children of discourse nodes, or the whole document when the root is not a
/// discourse node.
pub fn extract_edus(tree: &JointTree) -> Vec<EduSpan> {
    fn walk(node: &Node, out: &mut Vec<EduSpan>) {
        if node.is_discourse() {
            for c in node.children() {
                walk(c, out);
            }
        } else {
            let (s, e) = node.span();
            out.push(EduSpan::new(s, e));
        }
    }
    let mut out = Vec::new();
    walk(tree.root(), &mut out);
    out
}

/// Builds an internal node from label text. Panics on an invalid label;
/// meant for fixtures and tests.
pub fn node(label: &str, children: Vec<Node>) -> Node {
    Node::internal(label.parse().expect("valid label"), children)
}

/// A preterminal `(tag token)`.
pub fn pre(tag: &str, index: usize) -> Node {
    node(tag, alloc::vec![Node::Leaf(index)])
}
