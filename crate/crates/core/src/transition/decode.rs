//! Greedy decoding under a learned scorer.

use alloc::vec::Vec;

use super::{reconstruct, Action, ParserState, Phase, TransitionError};
use crate::math::argmax_masked;
use crate::tree::{EduSpan, JointTree, Label, LabeledSpan, Nuclearity, Token};

/// Syntactic label wrapped around each EDU in gold-EDU output.
pub const EDU_LABEL: &str = "EDU";

/// Scores for one document. Implementations are bound to the document they
/// were built for.
pub trait ActionScorer {
    /// Number of tokens of the bound document.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Label inventory. Label score `i + 1` belongs to `labels()[i]`.
    fn labels(&self) -> &[Label];

    /// Log-probabilities of Shift and Combine.
    fn structural(&self, state: &ParserState) -> [f64; 2];

    /// Log-probabilities over NoLabel (index 0) and the inventory.
    fn label_scores(&self, state: &ParserState) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeMode<'a> {
    EndToEnd,
    GoldEdus(&'a [EduSpan]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseOutput {
    pub tree: JointTree,
    pub actions: Vec<Action>,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("scorer is bound to {scorer} tokens, input has {tokens}")]
    LengthMismatch { scorer: usize, tokens: usize },
    #[error("scorer returned {got} label scores for an inventory of {expected}")]
    InventoryMismatch { expected: usize, got: usize },
    #[error("the label inventory is empty")]
    EmptyInventory,
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// Which structural actions may be taken.
pub fn structural_mask(state: &ParserState) -> [bool; 2] {
    [state.can_shift(), state.can_combine()]
}

/// Label-phase outputs allowed by the transition rules (index 0 is
/// NoLabel). In gold-EDU mode a shifted unit takes NoLabel and a combined
/// span takes a discourse label or NoLabel.
pub fn label_legality(state: &ParserState, labels: &[Label]) -> Vec<bool> {
    let mut mask = Vec::with_capacity(labels.len() + 1);
    if state.edu_mode() && state.top_is_shifted() {
        mask.push(true);
        mask.extend(labels.iter().map(|_| false));
        return mask;
    }
    mask.push(state.nolabel_allowed());
    mask.extend(labels.iter().map(|l| !state.edu_mode() || l.is_discourse()));
    mask
}

/// Label-phase outputs that keep the output well formed (index 0 is
/// NoLabel); a subset of [`label_legality`].
///
/// Beyond the transition rules this keeps the output a well-formed joint
/// tree: no discourse label on a shifted span, no syntactic label above a
/// discourse node, and a nucleus/satellite relation only over exactly two
/// children. In gold-EDU mode shifted units are left unlabeled and combined
/// spans take discourse labels only.
pub fn label_mask(state: &ParserState, labels: &[Label]) -> Vec<bool> {
    let mut mask = Vec::with_capacity(labels.len() + 1);
    let shifted = state.top_is_shifted();
    if state.edu_mode() && shifted {
        mask.push(true);
        mask.extend(labels.iter().map(|_| false));
        return mask;
    }
    mask.push(state.nolabel_allowed());
    let inner = InnerShape::of(state);
    for label in labels {
        let ok = match label {
            Label::Syntactic(_) => !state.edu_mode() && !inner.has_discourse,
            Label::Discourse(d) => {
                !shifted && (d.form == Nuclearity::MultiNuclear || inner.children == 2)
            }
        };
        mask.push(ok);
    }
    mask
}

struct InnerShape {
    children: usize,
    has_discourse: bool,
}

impl InnerShape {
    /// Child count and discourse content of the top span. Spans inside it
    /// are exactly the most recently labeled ones with start >= i.
    fn of(state: &ParserState) -> Self {
        let (i, j) = state.top_span().expect("label phase has a top span");
        let mut children = 0;
        let mut has_discourse = false;
        let mut left = j;
        for s in state.labeled().iter().rev() {
            if s.start < i || s.end > j {
                break;
            }
            has_discourse |= s.label.is_discourse();
            if s.end <= left {
                children += state.units_between(s.end, left) + 1;
                left = s.start;
            }
        }
        children += state.units_between(i, left);
        InnerShape {
            children,
            has_discourse,
        }
    }
}

/// Repeatedly takes the best allowed action until the goal.
pub fn parse_greedy<S: ActionScorer + ?Sized>(
    scorer: &S,
    tokens: &[Token],
    mode: DecodeMode<'_>,
) -> Result<ParseOutput, DecodeError> {
    if scorer.len() != tokens.len() {
        return Err(DecodeError::LengthMismatch {
            scorer: scorer.len(),
            tokens: tokens.len(),
        });
    }
    let mut state = match mode {
        DecodeMode::EndToEnd => ParserState::axiom(tokens.len())?,
        DecodeMode::GoldEdus(edus) => {
            if edus.last().map(|e| e.end) != Some(tokens.len()) {
                return Err(TransitionError::BadEdus.into());
            }
            ParserState::axiom_with_edus(edus)?
        }
    };
    let labels = scorer.labels();
    let mut actions = Vec::with_capacity(4 * tokens.len());
    while !state.is_terminal() {
        let (action, score) = match state.phase() {
            Phase::Structural => {
                let scores = scorer.structural(&state);
                let pick = argmax_masked(&scores, &structural_mask(&state))
                    .expect("a non-terminal structural state has a legal action");
                let action = if pick == 0 { Action::Shift } else { Action::Combine };
                (action, scores[pick])
            }
            Phase::LabelPhase => {
                let scores = scorer.label_scores(&state);
                if scores.len() != labels.len() + 1 {
                    return Err(DecodeError::InventoryMismatch {
                        expected: labels.len() + 1,
                        got: scores.len(),
                    });
                }
                let pick = best_label(&state, labels, &scores).ok_or(DecodeError::EmptyInventory)?;
                let action = match pick {
                    0 => Action::NoLabel,
                    p => Action::Label(labels[p - 1].clone()),
                };
                (action, scores[pick])
            }
        };
        state.apply_scored(&action, score)?;
        actions.push(action);
    }
    let score = state.score();
    let mut labeled = state.into_labeled();
    if let DecodeMode::GoldEdus(edus) = mode {
        let edu = Label::nt(EDU_LABEL);
        labeled.extend(edus.iter().map(|e| LabeledSpan::new(e.start, e.end, edu.clone())));
    }
    let tree = reconstruct(&labeled, tokens)?;
    Ok(ParseOutput {
        tree,
        actions,
        score,
    })
}

/// Best well-formed label-phase output. When the well-formedness rules
/// leave nothing, the best legal output is taken instead.
pub fn best_label(state: &ParserState, labels: &[Label], scores: &[f64]) -> Option<usize> {
    argmax_masked(scores, &label_mask(state, labels))
        .or_else(|| argmax_masked(scores, &label_legality(state, labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{extract_edus, tokens_from_words};
    use alloc::vec;

    /// Prefers Shift, then the first allowed label.
    struct Fixed {
        n: usize,
        labels: Vec<Label>,
    }

    impl ActionScorer for Fixed {
        fn len(&self) -> usize {
            self.n
        }
        fn labels(&self) -> &[Label] {
            &self.labels
        }
        fn structural(&self, _: &ParserState) -> [f64; 2] {
            [-0.1, -2.0]
        }
        fn label_scores(&self, _: &ParserState) -> Vec<f64> {
            let mut v = vec![-0.5];
            v.extend((0..self.labels.len()).map(|i| -1.0 - i as f64));
            v
        }
    }

    fn inventory() -> Vec<Label> {
        vec![
            Label::nt("S"),
            "<-Elaboration".parse().unwrap(),
            "<>List".parse().unwrap(),
        ]
    }

    #[test]
    fn end_to_end_counts() {
        for n in 1..8 {
            let s = Fixed {
                n,
                labels: inventory(),
            };
            let toks = tokens_from_words(&vec!["w"; n]);
            let out = parse_greedy(&s, &toks, DecodeMode::EndToEnd).unwrap();
            let shifts = out.actions.iter().filter(|a| **a == Action::Shift).count();
            let combines = out.actions.iter().filter(|a| **a == Action::Combine).count();
            assert_eq!((shifts, combines), (n, n - 1));
            assert_eq!(out.actions.len(), 2 * (2 * n - 1));
            for (idx, a) in out.actions.iter().enumerate() {
                assert_eq!(a.is_structural(), idx % 2 == 0);
            }
            out.tree.validate().unwrap();
        }
    }

    #[test]
    fn gold_edus_macro_shift() {
        let edus = [EduSpan::new(0, 2), EduSpan::new(2, 3), EduSpan::new(3, 6)];
        let s = Fixed {
            n: 6,
            labels: inventory(),
        };
        let toks = tokens_from_words(&["a", "b", "c", "d", "e", "f"]);
        let out = parse_greedy(&s, &toks, DecodeMode::GoldEdus(&edus)).unwrap();
        let shifts = out.actions.iter().filter(|a| **a == Action::Shift).count();
        let combines = out.actions.iter().filter(|a| **a == Action::Combine).count();
        assert_eq!((shifts, combines), (3, 2));
        for a in &out.actions {
            if let Action::Label(l) = a {
                assert!(l.is_discourse());
            }
        }
        assert_eq!(extract_edus(&out.tree), edus.to_vec());
        out.tree.validate().unwrap();
    }

    #[test]
    fn single_edu_document() {
        let edus = [EduSpan::new(0, 3)];
        let s = Fixed {
            n: 3,
            labels: inventory(),
        };
        let toks = tokens_from_words(&["a", "b", "c"]);
        let out = parse_greedy(&s, &toks, DecodeMode::GoldEdus(&edus)).unwrap();
        assert_eq!(out.actions, vec![Action::Shift, Action::NoLabel]);
        assert_eq!(out.tree.root().label(), Some(&Label::nt(EDU_LABEL)));
    }

    #[test]
    fn mismatches_are_errors() {
        let s = Fixed {
            n: 3,
            labels: inventory(),
        };
        let toks = tokens_from_words(&["a", "b"]);
        assert_eq!(
            parse_greedy(&s, &toks, DecodeMode::EndToEnd),
            Err(DecodeError::LengthMismatch { scorer: 3, tokens: 2 })
        );
    }

    #[test]
    fn mononuclear_needs_two_children() {
        // three shifted tokens, labeled S, combined twice without a label
        let l = inventory();
        let mut st = ParserState::axiom(3).unwrap();
        for a in [
            Action::Shift,
            Action::Label(Label::nt("S")),
            Action::Shift,
            Action::Label(Label::nt("S")),
            Action::Combine,
            Action::NoLabel,
            Action::Shift,
            Action::Label(Label::nt("S")),
            Action::Combine,
        ] {
            st.apply(&a).unwrap();
        }
        let mask = label_mask(&st, &l);
        // root: no NoLabel; S fine; Elaboration over 3 children not fine; List fine
        assert_eq!(mask, vec![false, true, false, true]);
    }
}
