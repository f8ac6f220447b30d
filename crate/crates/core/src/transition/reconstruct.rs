use alloc::vec::Vec;

use super::TransitionError;
use crate::tree::{JointTree, Label, LabeledSpan, Node, SyntacticLabel, Token};

/// Materializes a laminar span set as a tree. Chains become unary paths and
/// tokens not covered by a width-one span become bare leaves.
pub fn reconstruct(labeled: &[LabeledSpan], tokens: &[Token]) -> Result<JointTree, TransitionError> {
    let n = tokens.len();
    let mut spans: Vec<&LabeledSpan> = labeled.iter().collect();
    spans.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));

    // laminarity check over the sorted order
    let mut open: Vec<(usize, usize)> = Vec::new();
    for s in &spans {
        if s.start >= s.end || s.end > n {
            return Err(TransitionError::OutOfRange(s.start, s.end));
        }
        while open.last().is_some_and(|&(_, e)| e <= s.start) {
            open.pop();
        }
        if let Some(&(ps, pe)) = open.last() {
            if (ps, pe) == (s.start, s.end) {
                return Err(TransitionError::DuplicateExtent(ps, pe));
            }
            if s.end > pe {
                return Err(TransitionError::Crossing(ps, pe, s.start, s.end));
            }
        }
        open.push((s.start, s.end));
    }
    match spans.first() {
        Some(root) if (root.start, root.end) == (0, n) => {}
        _ => return Err(TransitionError::MissingRoot),
    }

    let mut next = 1;
    let root = build(&spans, &mut next, spans[0]);
    Ok(JointTree::new(tokens.to_vec(), root)?)
}

fn build(spans: &[&LabeledSpan], next: &mut usize, span: &LabeledSpan) -> Node {
    let mut children = Vec::new();
    let mut pos = span.start;
    while pos < span.end {
        match spans.get(*next) {
            Some(child) if child.start == pos && child.end <= span.end => {
                *next += 1;
                children.push(build(spans, next, child));
                pos = child.end;
            }
            _ => {
                children.push(Node::Leaf(pos));
                pos += 1;
            }
        }
    }
    expand(&span.label, children)
}

fn expand(label: &Label, children: Vec<Node>) -> Node {
    let Label::Syntactic(chain) = label else {
        return Node::internal(label.clone(), children);
    };
    let single = |part: &str| {
        Label::Syntactic(SyntacticLabel::new(part).expect("chain parts are valid labels"))
    };
    let mut parts = chain.parts().iter().rev();
    let innermost = parts.next().expect("chains are non-empty");
    let mut node = Node::internal(single(innermost), children);
    for part in parts {
        node = Node::internal(single(part), alloc::vec![node]);
    }
    node
}
