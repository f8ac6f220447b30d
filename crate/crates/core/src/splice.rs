//! Aligning EDU text to constituency tokens and splicing constituency
//! subtrees under a discourse skeleton.

use alloc::string::String;
use alloc::vec::Vec;

use crate::rst::{Skeleton, SkeletonNode};
use crate::tree::{edus_tile, EduSpan, JointTree, Label, Node, Token, TreeError};

/// The constituency trees of one document, sentence by sentence, with leaves
/// numbered over the whole document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxForest {
    tokens: Vec<Token>,
    sentences: Vec<Node>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SpliceError {
    #[error("skeleton has {skeleton} EDUs but {given} spans were given")]
    EduCount { skeleton: usize, given: usize },
    #[error("EDU spans do not tile the {0} document tokens")]
    NotTiling(usize),
    #[error("EDU {edu} ({span}) crosses a sentence boundary")]
    CrossesSentence { edu: usize, span: EduSpan },
    #[error("no constituency trees for the document")]
    MissingSyntax,
    #[error("EDU text diverges from the constituency tokens at character {0}")]
    TextMismatch(usize),
    #[error("EDU {0} boundary falls inside a token")]
    BoundaryInsideToken(usize),
    #[error("EDU {0} is empty after normalization")]
    EmptyEdu(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl SyntaxForest {
    /// Concatenates per-sentence trees (each numbered from zero) into one
    /// document, offsetting leaves and token indices.
    pub fn from_sentences(sentences: Vec<JointTree>) -> Result<Self, SpliceError> {
        if sentences.is_empty() {
            return Err(SpliceError::MissingSyntax);
        }
        let mut tokens = Vec::new();
        let mut roots = Vec::with_capacity(sentences.len());
        for tree in sentences {
            let offset = tokens.len();
            let (toks, root) = tree.into_parts();
            roots.push(root.shifted(offset));
            tokens.extend(
                toks.into_iter()
                    .map(|t| Token::new(t.index + offset, t.text)),
            );
        }
        Ok(SyntaxForest {
            tokens,
            sentences: roots,
        })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn sentences(&self) -> &[Node] {
        &self.sentences
    }

    /// First-token offset of every sentence.
    pub fn sentence_offsets(&self) -> Vec<usize> {
        self.sentences.iter().map(|s| s.span().0).collect()
    }
}

fn normalize_token(text: &str) -> String {
    match text {
        "``" | "''" => String::from("\""),
        "-LRB-" => String::from("("),
        "-RRB-" => String::from(")"),
        "-LCB-" => String::from("{"),
        "-RCB-" => String::from("}"),
        _ => text.chars().filter(|c| !c.is_whitespace()).collect(),
    }
}

fn normalize_text(text: &str) -> String {
    text.replace("<P>", "")
        .replace("``", "\"")
        .replace("''", "\"")
        .replace("&amp;", "&")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect()
}

/// Maps EDU texts onto token positions by comparing whitespace-free,
/// quote-normalized character streams. Every EDU boundary must coincide with
/// a token boundary and the two streams must agree exactly.
pub fn align_edus<S: AsRef<str>>(
    edu_texts: &[S],
    tokens: &[Token],
) -> Result<Vec<EduSpan>, SpliceError> {
    // character offset at which each token ends
    let mut token_ends = Vec::with_capacity(tokens.len());
    let mut token_stream = String::new();
    let mut chars = 0;
    for t in tokens {
        let norm = normalize_token(&t.text);
        chars += norm.chars().count();
        token_stream.push_str(&norm);
        token_ends.push(chars);
    }
    let mut edu_stream = String::new();
    let mut spans = Vec::with_capacity(edu_texts.len());
    let mut start_token = 0;
    let mut edu_chars = 0;
    for (i, text) in edu_texts.iter().enumerate() {
        let norm = normalize_text(text.as_ref());
        if norm.is_empty() {
            return Err(SpliceError::EmptyEdu(i));
        }
        edu_chars += norm.chars().count();
        edu_stream.push_str(&norm);
        let end_token = match token_ends.binary_search(&edu_chars) {
            Ok(pos) => pos + 1,
            Err(_) => {
                return Err(first_divergence(&edu_stream, &token_stream)
                    .map(SpliceError::TextMismatch)
                    .unwrap_or(SpliceError::BoundaryInsideToken(i)))
            }
        };
        spans.push(EduSpan::new(start_token, end_token));
        start_token = end_token;
    }
    if let Some(at) = first_divergence(&edu_stream, &token_stream) {
        return Err(SpliceError::TextMismatch(at));
    }
    if edu_stream.len() != token_stream.len() {
        return Err(SpliceError::TextMismatch(edu_stream.chars().count()));
    }
    Ok(spans)
}

/// Position of the first differing character over the common prefix length.
fn first_divergence(a: &str, b: &str) -> Option<usize> {
    a.chars().zip(b.chars()).position(|(x, y)| x != y)
}

/// Replaces every EDU placeholder of `skeleton` with constituency structure.
///
/// An EDU that matches one constituent exactly receives that subtree. An EDU
/// covering several maximal constituents receives a new node, labeled like
/// the lowest common ancestor of those constituents, dominating exactly them;
/// material of the ancestor that lies outside the EDU belongs to neighbouring
/// EDUs and thus ends up above, in the discourse layer.
pub fn splice_edus(
    skeleton: &Skeleton,
    edus: &[EduSpan],
    forest: &SyntaxForest,
) -> Result<JointTree, SpliceError> {
    if edus.len() != skeleton.edu_count() {
        return Err(SpliceError::EduCount {
            skeleton: skeleton.edu_count(),
            given: edus.len(),
        });
    }
    let n = forest.tokens().len();
    if !edus_tile(edus, n) {
        return Err(SpliceError::NotTiling(n));
    }
    let units = edus
        .iter()
        .enumerate()
        .map(|(i, &span)| edu_subtree(i, span, forest))
        .collect::<Result<Vec<_>, _>>()?;
    let root = build(skeleton.root(), &units);
    Ok(JointTree::new(forest.tokens().to_vec(), root)?)
}

fn build(node: &SkeletonNode, units: &[Node]) -> Node {
    match node {
        SkeletonNode::Edu(i) => units[*i].clone(),
        SkeletonNode::Relation { label, children } => Node::Internal {
            label: Label::Discourse(label.clone()),
            children: children.iter().map(|c| build(c, units)).collect(),
        },
    }
}

fn contains(outer: (usize, usize), inner: (usize, usize)) -> bool {
    outer.0 <= inner.0 && inner.1 <= outer.1
}

fn overlaps(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

fn edu_subtree(index: usize, span: EduSpan, forest: &SyntaxForest) -> Result<Node, SpliceError> {
    let edu = (span.start, span.end);
    let mut hits = forest
        .sentences()
        .iter()
        .filter(|s| overlaps(s.span(), edu));
    let (Some(sentence), None) = (hits.next(), hits.next()) else {
        return Err(SpliceError::CrossesSentence { edu: index, span });
    };
    // descend to the lowest node covering the whole EDU
    let mut lca = sentence;
    loop {
        if lca.span() == edu {
            return Ok(lca.clone());
        }
        match lca
            .children()
            .iter()
            .find(|c| contains(c.span(), edu))
        {
            Some(c) => lca = c,
            None => break,
        }
    }
    let mut maximal = Vec::new();
    collect_maximal(lca, edu, &mut maximal);
    let label = lca.label().cloned().expect("a node wider than the EDU is internal");
    Ok(Node::Internal {
        label,
        children: maximal,
    })
}

fn collect_maximal(node: &Node, edu: (usize, usize), out: &mut Vec<Node>) {
    for child in node.children() {
        let s = child.span();
        if contains(edu, s) {
            out.push(child.clone());
        } else if overlaps(edu, s) {
            collect_maximal(child, edu, out);
        }
    }
}
