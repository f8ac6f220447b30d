//! Joint trees as bracketed text, one tree per blank-line-separated block.
//!
//! Discourse labels are written `Rel->`, `<-Rel` and `<>Rel`; every other
//! label is a constituency label. Leaves are tokens, bare or under a
//! preterminal.

use std::fmt::Write as _;

use jointparse_core::tree::{Label, LabelError, Node, Token};
use jointparse_core::JointTree;

use super::sexp::{parse_all, Sexp};
use super::{escape_token, unescape_token, FormatError};

/// Builds nodes from s-expressions, numbering leaves as they are met.
pub(crate) struct TreeBuilder<F> {
    /// Maps a raw label to a node label, or `None` to drop the node with
    /// everything under it.
    pub label: F,
    pub tokens: Vec<Token>,
}

impl<F> TreeBuilder<F>
where
    F: FnMut(&str) -> Result<Option<Label>, LabelError>,
{
    pub fn new(label: F) -> Self {
        TreeBuilder {
            label,
            tokens: Vec::new(),
        }
    }

    pub fn node(&mut self, s: &Sexp) -> Result<Option<Node>, FormatError> {
        match s {
            Sexp::Atom { text, .. } => {
                let i = self.tokens.len();
                self.tokens.push(Token::new(i, unescape_token(text)));
                Ok(Some(Node::Leaf(i)))
            }
            Sexp::List { items, pos } => {
                let Some((head, rest)) = items.split_first() else {
                    return Err(FormatError::EmptyConstituent { pos: *pos });
                };
                let Some(raw) = head.as_atom() else {
                    return Err(FormatError::Syntax(super::SyntaxError::other(
                        *pos,
                        "constituent without a label",
                    )));
                };
                if rest.is_empty() {
                    return Err(FormatError::EmptyConstituent { pos: *pos });
                }
                let label = (self.label)(raw).map_err(|source| FormatError::Label { pos: head.pos(), source })?;
                let Some(label) = label else { return Ok(None) };
                let mut children = Vec::with_capacity(rest.len());
                for c in rest {
                    if let Some(n) = self.node(c)? {
                        children.push(n);
                    }
                }
                Ok((!children.is_empty()).then(|| Node::internal(label, children)))
            }
        }
    }

    pub fn finish(self, root: Node, index: usize) -> Result<JointTree, FormatError> {
        JointTree::new(self.tokens, root).map_err(|source| FormatError::Tree { index, source })
    }
}

/// Reads every tree in `text`.
pub fn read_joint(text: &str) -> Result<Vec<JointTree>, FormatError> {
    let forms = parse_all(text, false)?;
    let mut trees = Vec::with_capacity(forms.len());
    for (index, form) in forms.iter().enumerate() {
        let mut b = TreeBuilder::new(|raw: &str| raw.parse::<Label>().map(Some));
        let root = b.node(form)?.ok_or(FormatError::EmptyConstituent { pos: form.pos() })?;
        if matches!(root, Node::Leaf(_)) {
            return Err(FormatError::Syntax(super::SyntaxError::other(form.pos(), "bare token at top level")));
        }
        trees.push(b.finish(root, index)?);
    }
    Ok(trees)
}

/// Reads exactly one tree.
pub fn read_joint_one(text: &str) -> Result<JointTree, FormatError> {
    let mut trees = read_joint(text)?;
    match trees.len() {
        0 => Err(FormatError::Empty),
        1 => Ok(trees.pop().expect("one tree")),
        n => Err(FormatError::Line {
            line: 1,
            msg: format!("expected one tree, found {n}"),
        }),
    }
}

/// One tree on one line.
pub fn write_joint(tree: &JointTree) -> String {
    write_node(tree.root(), tree.tokens())
}

/// One subtree whose leaves index into `tokens`.
pub fn write_node(node: &Node, tokens: &[Token]) -> String {
    let mut out = String::new();
    push_node(node, tokens, &mut out);
    out
}

fn push_node(node: &Node, tokens: &[Token], out: &mut String) {
    match node {
        Node::Leaf(i) => out.push_str(&escape_token(&tokens[*i].text)),
        Node::Internal { label, children } => {
            let _ = write!(out, "({label}");
            for c in children {
                out.push(' ');
                push_node(c, tokens, out);
            }
            out.push(')');
        }
    }
}

/// Trees separated by blank lines, with a trailing newline.
pub fn write_treebank(trees: &[JointTree]) -> String {
    let mut out = String::new();
    for t in trees {
        out.push_str(&write_joint(t));
        out.push_str("\n\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use jointparse_core::tree::{node, pre, tokens_from_words};

    #[test]
    fn reads_preterminals_and_bare_leaves() {
        let t = read_joint_one("(<-Elaboration (S (NP a) b) (<>List (X c) (X d)))").unwrap();
        assert_eq!(t.words().collect::<Vec<_>>(), ["a", "b", "c", "d"]);
        let expected = node(
            "<-Elaboration",
            vec![
                node("S", vec![pre("NP", 0), Node::Leaf(1)]),
                node("<>List", vec![pre("X", 2), pre("X", 3)]),
            ],
        );
        assert_eq!(t.root(), &expected);
    }

    #[test]
    fn write_then_read() {
        let toks = tokens_from_words(&["(", "x", ")"]);
        let t = JointTree::new(toks, node("Background->", vec![pre("-LRB-", 0), node("S", vec![pre("X", 1), pre("-RRB-", 2)])])).unwrap();
        let text = write_joint(&t);
        assert_eq!(text, "(Background-> (-LRB- -LRB-) (S (X x) (-RRB- -RRB-)))");
        assert_eq!(read_joint_one(&text).unwrap(), t);
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(read_joint_one(""), Err(FormatError::Empty));
        assert!(matches!(read_joint("(S (NP a (b)"), Err(FormatError::Syntax(_))));
        assert!(matches!(read_joint("(S (NP a) (b))"), Err(FormatError::EmptyConstituent { .. })));
        assert!(matches!(read_joint("(<-> a b)"), Err(FormatError::Label { .. })));
        assert!(matches!(read_joint("(A+B a)"), Err(FormatError::Tree { .. })));
    }

    #[test]
    fn several_blocks() {
        let trees = read_joint("(X a)\n\n(Y b c)\n").unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(write_treebank(&trees), "(X a)\n\n(Y b c)\n\n");
    }
}
