//! Static and dynamic oracles.

use alloc::vec::Vec;

use super::{Action, ParserState, Phase, TransitionError};
use crate::tree::{collapse_unary, labeled_spans, JointTree, Label, LabeledSpan, Node};

/// Gold labeled spans, sorted, at most one label per extent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldSpans {
    spans: Vec<LabeledSpan>,
}

impl GoldSpans {
    pub fn new(mut spans: Vec<LabeledSpan>) -> Self {
        spans.sort();
        spans.dedup();
        GoldSpans { spans }
    }

    pub fn from_tree(tree: &JointTree) -> Self {
        GoldSpans {
            spans: labeled_spans(tree),
        }
    }

    /// Only the discourse-labeled spans of `tree`.
    pub fn discourse(tree: &JointTree) -> Self {
        GoldSpans {
            spans: labeled_spans(tree)
                .into_iter()
                .filter(|s| s.label.is_discourse())
                .collect(),
        }
    }

    pub fn spans(&self) -> &[LabeledSpan] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn label_at(&self, start: usize, end: usize) -> Option<&Label> {
        self.spans
            .binary_search_by(|s| (s.start, s.end).cmp(&(start, end)))
            .ok()
            .map(|i| &self.spans[i].label)
    }

    pub fn contains(&self, span: &LabeledSpan) -> bool {
        self.label_at(span.start, span.end) == Some(&span.label)
    }
}

/// The canonical derivation of `gold`: children left to right, each new
/// child combined into the growing span, with the node's label on the last
/// combine and NoLabel on the intermediate ones.
pub fn static_oracle(gold: &JointTree) -> Vec<Action> {
    fn derive(node: &Node, out: &mut Vec<Action>) {
        let Some((label, children)) = collapse_unary(node) else {
            out.push(Action::Shift);
            out.push(Action::NoLabel);
            return;
        };
        if let [Node::Leaf(_)] = children {
            out.push(Action::Shift);
            out.push(Action::Label(label));
            return;
        }
        derive(&children[0], out);
        let last = children.len() - 1;
        for (idx, child) in children.iter().enumerate().skip(1) {
            derive(child, out);
            out.push(Action::Combine);
            out.push(if idx == last {
                Action::Label(label.clone())
            } else {
                Action::NoLabel
            });
        }
    }
    let mut out = Vec::with_capacity(4 * gold.len());
    derive(gold.root(), &mut out);
    out
}

/// Gold spans already matched plus gold spans still attainable from `state`.
///
/// With top span `(i, j)` and boundary stack `B`, an unlabeled gold span
/// `(l, r)` stays attainable iff `r > j` and `l ∈ B ∪ [j, n)`, or `r = j`,
/// `l ∈ B` and `l < i`. In the label phase the freshly built top span itself
/// also counts.
pub fn reachable_count(state: &ParserState, gold: &GoldSpans) -> usize {
    let matched = state.labeled().iter().filter(|s| gold.contains(s)).count();
    let boundaries = state.boundaries();
    let j = state.frontier();
    // at the axiom the top span is the sentinel span (-1, 0)
    let i = state.top_span().map(|(i, _)| i);
    let in_stack = |l: usize| boundaries.binary_search(&l).is_ok();
    let label_phase = state.phase() == Phase::LabelPhase;
    let open = gold
        .spans()
        .iter()
        .filter(|g| {
            let (l, r) = (g.start, g.end);
            (r > j && (l >= j || in_stack(l)))
                || (r == j && in_stack(l) && i.is_some_and(|i| l < i))
                || (label_phase && Some((l, r)) == state.top_span())
        })
        .count();
    matched + open
}

/// Actions that keep the largest number of gold spans attainable.
///
/// In the label phase this is the gold label of the top span, or NoLabel
/// when the top span is not a gold bracket. In the structural phase it is
/// every legal structural action maximizing [`reachable_count`] of the
/// successor state.
pub fn dynamic_oracle(state: &ParserState, gold: &GoldSpans) -> Result<Vec<Action>, TransitionError> {
    if state.is_terminal() {
        return Err(TransitionError::Terminal);
    }
    match state.phase() {
        Phase::LabelPhase => {
            let (i, j) = state.top_span().expect("label phase has a top span");
            Ok(alloc::vec![match gold.label_at(i, j) {
                Some(label) => Action::Label(label.clone()),
                None => Action::NoLabel,
            }])
        }
        Phase::Structural => {
            let scored: Vec<(Action, usize)> = [Action::Shift, Action::Combine]
                .into_iter()
                .filter(|a| state.is_legal(a))
                .map(|a| {
                    let next = state.applied(&a).expect("legal action applies");
                    let value = reachable_count(&next, gold);
                    (a, value)
                })
                .collect();
            let best = scored.iter().map(|(_, v)| *v).max().unwrap_or(0);
            Ok(scored
                .into_iter()
                .filter(|(_, v)| *v == best)
                .map(|(a, _)| a)
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::reconstruct;
    use crate::tree::{node, pre, tokens_from_words};
    use alloc::vec;

    fn replay(n: usize, actions: &[Action]) -> ParserState {
        let mut s = ParserState::axiom(n).unwrap();
        for a in actions {
            s.apply(a).unwrap();
        }
        s
    }

    #[test]
    fn flat_binary_bracket() {
        let t = JointTree::new(
            tokens_from_words(&["x", "y"]),
            node("A", vec![Node::Leaf(0), Node::Leaf(1)]),
        )
        .unwrap();
        let d = static_oracle(&t);
        assert_eq!(
            d,
            vec![
                Action::Shift,
                Action::NoLabel,
                Action::Shift,
                Action::NoLabel,
                Action::Combine,
                Action::Label(Label::nt("A")),
            ]
        );
        let s = replay(2, &d);
        assert!(s.is_terminal());
    }

    #[test]
    fn multinuclear_node_uses_nolabel_between_members() {
        let t = JointTree::new(
            tokens_from_words(&["a", "b", "c"]),
            node("<>List", vec![pre("S", 0), pre("S", 1), pre("S", 2)]),
        )
        .unwrap();
        let d = static_oracle(&t);
        let list: Label = "<>List".parse().unwrap();
        assert_eq!(
            d,
            vec![
                Action::Shift,
                Action::Label(Label::nt("S")),
                Action::Shift,
                Action::Label(Label::nt("S")),
                Action::Combine,
                Action::NoLabel,
                Action::Shift,
                Action::Label(Label::nt("S")),
                Action::Combine,
                Action::Label(list),
            ]
        );
        let s = replay(3, &d);
        assert_eq!(reconstruct(s.labeled(), t.tokens()).unwrap(), t);
    }

    #[test]
    fn unary_chains_are_one_label() {
        let t = JointTree::new(
            tokens_from_words(&["a", "b"]),
            node("S", vec![node("NP", vec![pre("NN", 0)]), pre("VB", 1)]),
        )
        .unwrap();
        let d = static_oracle(&t);
        assert_eq!(d[1], Action::Label("NP+NN".parse().unwrap()));
    }

    #[test]
    fn axiom_reaches_everything() {
        let t = JointTree::new(
            tokens_from_words(&["a", "b", "c"]),
            node("S", vec![pre("X", 0), node("Y", vec![pre("X", 1), pre("X", 2)])]),
        )
        .unwrap();
        let gold = GoldSpans::from_tree(&t);
        let s = ParserState::axiom(3).unwrap();
        assert_eq!(reachable_count(&s, &gold), gold.len());
        assert_eq!(dynamic_oracle(&s, &gold).unwrap(), vec![Action::Shift]);
    }

    #[test]
    fn dropped_boundary_loses_span() {
        // tokens 0..4; gold (2,4,NP). Combining (0,2) and (2,3) drops boundary 2.
        let gold = GoldSpans::new(vec![
            LabeledSpan::new(2, 4, Label::nt("NP")),
            LabeledSpan::new(0, 4, Label::nt("S")),
        ]);
        let s = ParserState::from_parts(4, vec![0, 3], None, vec![]).unwrap();
        assert_eq!(reachable_count(&s, &gold), 1);
        let s = ParserState::from_parts(4, vec![0, 2, 3], None, vec![]).unwrap();
        assert_eq!(reachable_count(&s, &gold), 2);
        assert_eq!(dynamic_oracle(&s, &gold).unwrap(), vec![Action::Shift]);
    }

    #[test]
    fn label_phase_oracle() {
        let gold = GoldSpans::new(vec![
            LabeledSpan::new(0, 2, "S+VP".parse().unwrap()),
            LabeledSpan::new(0, 3, Label::nt("S")),
        ]);
        let s = ParserState::from_parts(3, vec![0, 2], Some(1), vec![]).unwrap();
        assert_eq!(
            dynamic_oracle(&s, &gold).unwrap(),
            vec![Action::Label("S+VP".parse().unwrap())]
        );
        let s = ParserState::from_parts(3, vec![0, 1], Some(0), vec![]).unwrap();
        assert_eq!(dynamic_oracle(&s, &gold).unwrap(), vec![Action::NoLabel]);
    }
}
