//! Span, segmentation and discourse metrics.
//!
//! Every metric is a match count over multisets of spans; documents are
//! combined by summing counts (micro-averaging).

use alloc::vec::Vec;
use core::ops::AddAssign;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::tree::{edus_tile, extract_edus, labeled_spans, EduSpan, JointTree, Level, Nuclearity};

/// Precision, recall and F1 as fractions in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(c: MatchCounts) -> Self {
        // nothing to find and nothing predicted counts as perfect
        if c.gold == 0 && c.pred == 0 {
            return Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            };
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(c.matched, c.pred);
        let recall = ratio(c.matched, c.gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    /// The three values scaled to percentages.
    pub fn percent(&self) -> [f64; 3] {
        [self.precision * 100.0, self.recall * 100.0, self.f1 * 100.0]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MatchCounts {
    pub matched: usize,
    pub gold: usize,
    pub pred: usize,
}

impl MatchCounts {
    pub fn prf(self) -> Prf {
        Prf::from_counts(self)
    }
}

impl AddAssign for MatchCounts {
    fn add_assign(&mut self, o: Self) {
        self.matched += o.matched;
        self.gold += o.gold;
        self.pred += o.pred;
    }
}

/// Size of the multiset intersection of two sorted slices.
fn multiset_matches<T: Ord>(gold: &[T], pred: &[T]) -> usize {
    let (mut a, mut b, mut n) = (0, 0, 0);
    while a < gold.len() && b < pred.len() {
        match gold[a].cmp(&pred[b]) {
            core::cmp::Ordering::Less => a += 1,
            core::cmp::Ordering::Greater => b += 1,
            core::cmp::Ordering::Equal => {
                n += 1;
                a += 1;
                b += 1;
            }
        }
    }
    n
}

fn count<T: Ord>(mut gold: Vec<T>, mut pred: Vec<T>) -> MatchCounts {
    gold.sort();
    pred.sort();
    MatchCounts {
        matched: multiset_matches(&gold, &pred),
        gold: gold.len(),
        pred: pred.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("gold and predicted trees have different tokens")]
    TokenMismatch,
    #[error("segmentation does not tile the document")]
    NotTiling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanLevel {
    All,
    Syntactic,
    Discourse,
}

fn same_tokens(gold: &JointTree, pred: &JointTree) -> Result<(), EvalError> {
    if gold.tokens() == pred.tokens() {
        Ok(())
    } else {
        Err(EvalError::TokenMismatch)
    }
}

/// Labeled span matches at one level; chains match only when identical.
pub fn span_counts(gold: &JointTree, pred: &JointTree, level: SpanLevel) -> Result<MatchCounts, EvalError> {
    same_tokens(gold, pred)?;
    let keep = |s: &crate::tree::LabeledSpan| match level {
        SpanLevel::All => true,
        SpanLevel::Syntactic => s.label.level() == Level::Syntactic,
        SpanLevel::Discourse => s.label.level() == Level::Discourse,
    };
    let g = labeled_spans(gold).into_iter().filter(|s| keep(s)).collect();
    let p = labeled_spans(pred).into_iter().filter(|s| keep(s)).collect();
    Ok(count(g, p))
}

pub fn span_prf(gold: &JointTree, pred: &JointTree, level: SpanLevel) -> Result<Prf, EvalError> {
    span_counts(gold, pred, level).map(MatchCounts::prf)
}

/// Matches of internal EDU boundaries.
pub fn segmentation_counts(gold: &[EduSpan], pred: &[EduSpan]) -> Result<MatchCounts, EvalError> {
    let n = gold.last().map_or(0, |e| e.end);
    if !edus_tile(gold, n) || !edus_tile(pred, n) {
        return Err(EvalError::NotTiling);
    }
    let internal = |edus: &[EduSpan]| edus.iter().skip(1).map(|e| e.start).collect::<Vec<_>>();
    Ok(count(internal(gold), internal(pred)))
}

pub fn segmentation_f1(gold: &[EduSpan], pred: &[EduSpan]) -> Result<Prf, EvalError> {
    segmentation_counts(gold, pred).map(MatchCounts::prf)
}

/// Discourse span matches: bare, with nuclearity, with nuclearity and
/// relation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DiscourseCounts {
    pub structure: MatchCounts,
    pub nuclearity: MatchCounts,
    pub relation: MatchCounts,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscourseScores {
    pub structure: Prf,
    pub nuclearity: Prf,
    pub relation: Prf,
}

impl DiscourseCounts {
    pub fn prf(self) -> DiscourseScores {
        DiscourseScores {
            structure: self.structure.prf(),
            nuclearity: self.nuclearity.prf(),
            relation: self.relation.prf(),
        }
    }
}

pub fn discourse_counts(gold: &JointTree, pred: &JointTree) -> Result<DiscourseCounts, EvalError> {
    same_tokens(gold, pred)?;
    type Key<'a> = (usize, usize, Nuclearity, &'a str);
    fn keys(spans: &[crate::tree::LabeledSpan]) -> Vec<Key<'_>> {
        spans
            .iter()
            .filter_map(|s| {
                let d = s.label.as_discourse()?;
                Some((s.start, s.end, d.form, d.relation.as_str()))
            })
            .collect()
    }
    let gs = labeled_spans(gold);
    let ps = labeled_spans(pred);
    let (g, p) = (keys(&gs), keys(&ps));
    fn project<'a>(ks: &[Key<'a>], depth: u8) -> Vec<(usize, usize, Option<Nuclearity>, Option<&'a str>)> {
        ks.iter()
            .map(|&(s, e, f, r)| (s, e, (depth >= 1).then_some(f), (depth >= 2).then_some(r)))
            .collect()
    }
    Ok(DiscourseCounts {
        structure: count(project(&g, 0), project(&p, 0)),
        nuclearity: count(project(&g, 1), project(&p, 1)),
        relation: count(project(&g, 2), project(&p, 2)),
    })
}

pub fn discourse_metrics(gold: &JointTree, pred: &JointTree) -> Result<DiscourseScores, EvalError> {
    discourse_counts(gold, pred).map(DiscourseCounts::prf)
}

/// All counts for one document, or summed over a corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub seg: MatchCounts,
    pub discourse: DiscourseCounts,
    pub constituency: MatchCounts,
    pub disc: MatchCounts,
    pub overall: MatchCounts,
}

/// Metric names as used in machine-readable reports, in output order.
pub const METRICS: [&str; 7] = ["seg", "struct", "nuc", "rel", "const", "disc", "overall"];

impl Report {
    pub fn new(gold: &JointTree, pred: &JointTree) -> Result<Self, EvalError> {
        Ok(Report {
            seg: segmentation_counts(&extract_edus(gold), &extract_edus(pred))?,
            discourse: discourse_counts(gold, pred)?,
            constituency: span_counts(gold, pred, SpanLevel::Syntactic)?,
            disc: span_counts(gold, pred, SpanLevel::Discourse)?,
            overall: span_counts(gold, pred, SpanLevel::All)?,
        })
    }

    /// Micro-average over documents.
    pub fn micro<'a>(docs: impl IntoIterator<Item = &'a Report>) -> Report {
        let mut total = Report::default();
        for d in docs {
            total += *d;
        }
        total
    }

    /// `(name, scores)` in [`METRICS`] order.
    pub fn scores(&self) -> [(&'static str, Prf); 7] {
        let counts = [
            self.seg,
            self.discourse.structure,
            self.discourse.nuclearity,
            self.discourse.relation,
            self.constituency,
            self.disc,
            self.overall,
        ];
        let mut out = [("", Prf::from_counts(MatchCounts::default())); 7];
        for (slot, (name, c)) in out.iter_mut().zip(METRICS.iter().zip(counts)) {
            *slot = (*name, c.prf());
        }
        out
    }
}

impl AddAssign for Report {
    fn add_assign(&mut self, o: Self) {
        self.seg += o.seg;
        self.discourse.structure += o.discourse.structure;
        self.discourse.nuclearity += o.discourse.nuclearity;
        self.discourse.relation += o.discourse.relation;
        self.constituency += o.constituency;
        self.disc += o.disc;
        self.overall += o.overall;
    }
}
