//! Span-based transition system for joint syntax and discourse.
//!
//! The stack holds only span boundaries. Structural actions (shift,
//! combine) alternate with label actions (label, nolabel). A structural
//! action marks the span it produced with its split point; the mark is what
//! tells the two phases apart and is erased by the following label action.
//!
//! Boundaries are stored without the leading `-1` sentinel, so the axiom
//! state has boundaries `[0]`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::tree::{edus_tile, EduSpan, Label, LabelError, LabeledSpan};

mod decode;
mod oracle;
mod reconstruct;

pub use decode::{
    best_label, label_legality, label_mask, parse_greedy, structural_mask, ActionScorer, DecodeError,
    DecodeMode, ParseOutput, EDU_LABEL,
};
pub use oracle::{dynamic_oracle, reachable_count, static_oracle, GoldSpans};
pub use reconstruct::reconstruct;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Shift,
    Combine,
    Label(Label),
    NoLabel,
}

impl Action {
    pub fn is_structural(&self) -> bool {
        matches!(self, Action::Shift | Action::Combine)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift => f.write_str("SH"),
            Action::Combine => f.write_str("CB"),
            Action::Label(l) => write!(f, "L:{l}"),
            Action::NoLabel => f.write_str("NL"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ActionParseError {
    #[error("unknown action mnemonic {0:?}")]
    Unknown(String),
    #[error("bad label in action: {0}")]
    Label(#[from] LabelError),
}

impl FromStr for Action {
    type Err = ActionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SH" => Ok(Action::Shift),
            "CB" => Ok(Action::Combine),
            "NL" => Ok(Action::NoLabel),
            _ => match s.strip_prefix("L:") {
                Some(l) => Ok(Action::Label(l.parse()?)),
                None => Err(ActionParseError::Unknown(s.to_string())),
            },
        }
    }
}

/// Whitespace-separated mnemonics: `SH`, `CB`, `L:<chain>`, `NL`.
pub fn write_derivation(actions: &[Action]) -> String {
    actions
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_derivation(text: &str) -> Result<Vec<Action>, ActionParseError> {
    text.split_whitespace().map(str::parse).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Structural,
    LabelPhase,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransitionError {
    #[error("document has no tokens")]
    EmptyDocument,
    #[error("EDU spans do not tile the document")]
    BadEdus,
    #[error("state is terminal")]
    Terminal,
    #[error("action {action} is illegal in this state")]
    Illegal { action: String },
    #[error("spans [{0}, {1}) and [{2}, {3}) cross")]
    Crossing(usize, usize, usize, usize),
    #[error("extent [{0}, {1}) labeled twice")]
    DuplicateExtent(usize, usize),
    #[error("no span covers the whole document")]
    MissingRoot,
    #[error("span [{0}, {1}) lies outside the document")]
    OutOfRange(usize, usize),
    #[error(transparent)]
    Tree(#[from] crate::tree::TreeError),
}

/// A parser configuration: boundary stack, optional split mark on the top
/// span, labeled spans so far, and accumulated score.
#[derive(Clone, Debug, PartialEq)]
pub struct ParserState {
    n: usize,
    boundaries: Vec<usize>,
    midpoint: Option<usize>,
    labeled: Vec<LabeledSpan>,
    score: f64,
    /// EDU end positions when shifting whole EDUs at a time.
    stops: Option<Arc<[usize]>>,
}

impl ParserState {
    /// The axiom over `n` tokens.
    pub fn axiom(n: usize) -> Result<Self, TransitionError> {
        if n == 0 {
            return Err(TransitionError::EmptyDocument);
        }
        Ok(ParserState {
            n,
            boundaries: alloc::vec![0],
            midpoint: None,
            labeled: Vec::new(),
            score: 0.0,
            stops: None,
        })
    }

    /// The axiom for EDU-level parsing: every shift consumes one whole EDU.
    pub fn axiom_with_edus(edus: &[EduSpan]) -> Result<Self, TransitionError> {
        let n = edus.last().map_or(0, |e| e.end);
        if n == 0 {
            return Err(TransitionError::EmptyDocument);
        }
        if !edus_tile(edus, n) {
            return Err(TransitionError::BadEdus);
        }
        let mut state = Self::axiom(n)?;
        state.stops = Some(edus.iter().map(|e| e.end).collect());
        Ok(state)
    }

    /// Rebuilds a state from its parts. `boundaries` exclude the sentinel
    /// and must start at 0 and increase strictly.
    pub fn from_parts(
        n: usize,
        boundaries: Vec<usize>,
        midpoint: Option<usize>,
        labeled: Vec<LabeledSpan>,
    ) -> Result<Self, TransitionError> {
        let ok = n > 0
            && boundaries.first() == Some(&0)
            && boundaries.windows(2).all(|w| w[0] < w[1])
            && boundaries.last().is_some_and(|&j| j <= n)
            && match midpoint {
                None => true,
                Some(k) => {
                    boundaries.len() >= 2 && {
                        let (i, j) = (boundaries[boundaries.len() - 2], boundaries[boundaries.len() - 1]);
                        i <= k && k < j
                    }
                }
            };
        if !ok {
            return Err(TransitionError::Illegal {
                action: String::from("from_parts"),
            });
        }
        Ok(ParserState {
            n,
            boundaries,
            midpoint,
            labeled,
            score: 0.0,
            stops: None,
        })
    }

    /// Shift units (tokens, or EDUs in EDU mode) in `[a, b)`.
    pub fn units_between(&self, a: usize, b: usize) -> usize {
        match &self.stops {
            None => b.saturating_sub(a),
            Some(stops) => stops.iter().filter(|&&e| a < e && e <= b).count(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Boundary stack without the `-1` sentinel.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn midpoint(&self) -> Option<usize> {
        self.midpoint
    }

    pub fn labeled(&self) -> &[LabeledSpan] {
        &self.labeled
    }

    pub fn into_labeled(self) -> Vec<LabeledSpan> {
        self.labeled
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn edu_mode(&self) -> bool {
        self.stops.is_some()
    }

    pub fn is_terminal(&self) -> bool {
        self.midpoint.is_none() && self.boundaries.len() == 2 && self.boundaries[1] == self.n
    }

    pub fn phase(&self) -> Phase {
        if self.midpoint.is_some() {
            Phase::LabelPhase
        } else {
            Phase::Structural
        }
    }

    /// Top span `(i, j)`, or `None` at the axiom.
    pub fn top_span(&self) -> Option<(usize, usize)> {
        match self.boundaries.as_slice() {
            [.., i, j] => Some((*i, *j)),
            _ => None,
        }
    }

    /// Left boundary of the span below the top span.
    pub fn below_left(&self) -> Option<usize> {
        match self.boundaries.as_slice() {
            [.., a, _, _] => Some(*a),
            _ => None,
        }
    }

    /// Rightmost boundary reached so far.
    pub fn frontier(&self) -> usize {
        *self.boundaries.last().expect("boundary stack never empty")
    }

    fn next_stop(&self, j: usize) -> usize {
        match &self.stops {
            None => j + 1,
            Some(stops) => stops[stops.partition_point(|&s| s <= j)],
        }
    }

    pub fn can_shift(&self) -> bool {
        self.midpoint.is_none() && self.frontier() < self.n
    }

    pub fn can_combine(&self) -> bool {
        self.midpoint.is_none() && self.boundaries.len() >= 3
    }

    /// Whether the top span was produced by a shift (degenerate mark).
    pub fn top_is_shifted(&self) -> bool {
        matches!((self.midpoint, self.top_span()), (Some(k), Some((i, _))) if k == i)
    }

    /// NoLabel is ruled out on the span covering the whole document, except
    /// for a single shifted EDU in EDU mode.
    pub fn nolabel_allowed(&self) -> bool {
        if self.midpoint.is_none() {
            return false;
        }
        let root = self.top_span() == Some((0, self.n));
        !root || (self.edu_mode() && self.top_is_shifted())
    }

    /// Legal actions with label actions drawn from `inventory`.
    pub fn legal_actions(&self, inventory: &[Label]) -> Result<Vec<Action>, TransitionError> {
        if self.is_terminal() {
            return Err(TransitionError::Terminal);
        }
        let mut out = Vec::new();
        match self.phase() {
            Phase::Structural => {
                if self.can_shift() {
                    out.push(Action::Shift);
                }
                if self.can_combine() {
                    out.push(Action::Combine);
                }
            }
            Phase::LabelPhase => {
                out.extend(inventory.iter().cloned().map(Action::Label));
                if self.nolabel_allowed() {
                    out.push(Action::NoLabel);
                }
            }
        }
        Ok(out)
    }

    /// Legality of one action. Any label is accepted in the label phase.
    pub fn is_legal(&self, action: &Action) -> bool {
        match action {
            Action::Shift => self.can_shift(),
            Action::Combine => self.can_combine(),
            Action::Label(_) => self.midpoint.is_some(),
            Action::NoLabel => self.nolabel_allowed(),
        }
    }

    pub fn apply(&mut self, action: &Action) -> Result<(), TransitionError> {
        self.apply_scored(action, 0.0)
    }

    /// Applies `action` and adds `score` to the accumulated score.
    pub fn apply_scored(&mut self, action: &Action, score: f64) -> Result<(), TransitionError> {
        if self.is_terminal() {
            return Err(TransitionError::Terminal);
        }
        if !self.is_legal(action) {
            return Err(TransitionError::Illegal {
                action: action.to_string(),
            });
        }
        match action {
            Action::Shift => {
                let j = self.frontier();
                let next = self.next_stop(j);
                self.boundaries.push(next);
                self.midpoint = Some(j);
            }
            Action::Combine => {
                let len = self.boundaries.len();
                let k = self.boundaries.remove(len - 2);
                self.midpoint = Some(k);
            }
            Action::Label(label) => {
                let (i, j) = self.top_span().expect("label phase has a top span");
                self.labeled.push(LabeledSpan::new(i, j, label.clone()));
                self.midpoint = None;
            }
            Action::NoLabel => self.midpoint = None,
        }
        self.score += score;
        Ok(())
    }

    /// Returns the successor state, leaving `self` untouched.
    pub fn applied(&self, action: &Action) -> Result<ParserState, TransitionError> {
        let mut next = self.clone();
        next.apply(action)?;
        Ok(next)
    }
}
