//! Seeded generators of synthetic joint trees.
//!
//! Licensed treebanks are not redistributable, so tests and desk-scale
//! experiments draw joint trees from here. Trees contain mononuclear and
//! multinuclear discourse nodes, unary chains, preterminals and bare leaves.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rst::{Skeleton, SkeletonNode};
use crate::splice::SyntaxForest;
use crate::tree::{DiscourseLabel, EduSpan, JointTree, Label, Node, Nuclearity, Token};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthParams {
    pub max_tokens: usize,
    pub max_edus: usize,
    pub relations: Vec<String>,
    pub nonterminals: Vec<String>,
    pub pos_tags: Vec<String>,
    pub vocab_size: usize,
    /// Probability that a discourse node is multinuclear.
    pub multinuclear_prob: f64,
    /// Probability of wrapping a constituent in an extra unary node.
    pub unary_prob: f64,
    /// Probability that a token is attached without a preterminal.
    pub bare_leaf_prob: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        fn strings(xs: &[&str]) -> Vec<String> {
            xs.iter().map(|s| s.to_string()).collect()
        }
        SynthParams {
            max_tokens: 40,
            max_edus: 6,
            relations: strings(&[
                "Elaboration",
                "Attribution",
                "Background",
                "Contrast",
                "List",
                "Purpose",
                "Same-Unit",
            ]),
            nonterminals: strings(&["S", "NP", "VP", "PP", "SBAR"]),
            pos_tags: strings(&["NN", "VB", "DT", "IN", "JJ", "CC"]),
            vocab_size: 60,
            multinuclear_prob: 0.35,
            unary_prob: 0.15,
            bare_leaf_prob: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("max_tokens must be at least 1")]
    NoTokens,
    #[error("max_edus must be at least 1")]
    NoEdus,
    #[error("label inventories and vocabulary must be non-empty")]
    EmptyInventory,
}

impl SynthParams {
    fn check(&self) -> Result<(), SynthError> {
        if self.max_tokens == 0 {
            return Err(SynthError::NoTokens);
        }
        if self.max_edus == 0 {
            return Err(SynthError::NoEdus);
        }
        if self.relations.is_empty()
            || self.nonterminals.is_empty()
            || self.pos_tags.is_empty()
            || self.vocab_size == 0
        {
            return Err(SynthError::EmptyInventory);
        }
        Ok(())
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    p: &'a SynthParams,
}

impl Gen<'_> {
    fn pick<'s>(&mut self, xs: &'s [String]) -> &'s str {
        &xs[self.rng.random_range(0..xs.len())]
    }

    fn nt(&mut self) -> Label {
        let p = self.p;
        Label::nt(self.pick(&p.nonterminals))
    }

    /// Sorted cut points splitting `[lo, hi)` into `parts` non-empty pieces.
    fn cuts(&mut self, lo: usize, hi: usize, parts: usize) -> Vec<usize> {
        let mut points: Vec<usize> = sample(&mut self.rng, hi - lo - 1, parts - 1)
            .into_iter()
            .map(|c| lo + 1 + c)
            .collect();
        points.sort_unstable();
        let mut bounds = Vec::with_capacity(parts + 1);
        bounds.push(lo);
        bounds.extend(points);
        bounds.push(hi);
        bounds
    }

    fn words(&mut self, n: usize) -> Vec<Token> {
        (0..n)
            .map(|i| Token::new(i, format!("w{}", self.rng.random_range(0..self.p.vocab_size))))
            .collect()
    }

    /// A constituent over `[lo, hi)`. `allow_bare` lets a single token be
    /// returned without a preterminal.
    fn syntax(&mut self, lo: usize, hi: usize, allow_bare: bool) -> Node {
        let node = if hi - lo == 1 {
            if allow_bare && self.rng.random_bool(self.p.bare_leaf_prob) {
                return Node::Leaf(lo);
            }
            let p = self.p;
            let tag = Label::nt(self.pick(&p.pos_tags));
            Node::internal(tag, alloc::vec![Node::Leaf(lo)])
        } else {
            let max_parts = (hi - lo).min(3);
            let parts = self.rng.random_range(2..=max_parts);
            let bounds = self.cuts(lo, hi, parts);
            let children = bounds
                .windows(2)
                .map(|w| self.syntax(w[0], w[1], true))
                .collect();
            Node::internal(self.nt(), children)
        };
        if self.rng.random_bool(self.p.unary_prob) {
            Node::internal(self.nt(), alloc::vec![node])
        } else {
            node
        }
    }

    fn discourse_label(&mut self, form: Nuclearity) -> DiscourseLabel {
        let p = self.p;
        DiscourseLabel::new(self.pick(&p.relations), form).expect("valid relation names")
    }

    /// A discourse skeleton over EDU placeholders `[lo, hi)`.
    fn skeleton(&mut self, lo: usize, hi: usize) -> SkeletonNode {
        let width = hi - lo;
        if width == 1 {
            return SkeletonNode::Edu(lo);
        }
        let multi = self.rng.random_bool(self.p.multinuclear_prob);
        let (form, parts) = if multi {
            (Nuclearity::MultiNuclear, self.rng.random_range(2..=width.min(4)))
        } else if self.rng.random_bool(0.5) {
            (Nuclearity::NucleusThenSatellite, 2)
        } else {
            (Nuclearity::SatelliteThenNucleus, 2)
        };
        let bounds = self.cuts(lo, hi, parts);
        let label = self.discourse_label(form);
        SkeletonNode::Relation {
            label,
            children: bounds.windows(2).map(|w| self.skeleton(w[0], w[1])).collect(),
        }
    }
}

fn materialize(node: &SkeletonNode, units: &[Node]) -> Node {
    match node {
        SkeletonNode::Edu(i) => units[*i].clone(),
        SkeletonNode::Relation { label, children } => Node::internal(
            Label::Discourse(label.clone()),
            children.iter().map(|c| materialize(c, units)).collect(),
        ),
    }
}

/// Draws one joint tree. The same seed and parameters always give the same
/// tree.
pub fn generate_synthetic(seed: u64, params: &SynthParams) -> Result<JointTree, SynthError> {
    params.check()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        p: params,
    };
    let n = g.rng.random_range(1..=params.max_tokens);
    let m = g.rng.random_range(1..=params.max_edus.min(n));
    let bounds = g.cuts(0, n, m);
    let units: Vec<Node> = bounds
        .windows(2)
        .map(|w| g.syntax(w[0], w[1], false))
        .collect();
    let skeleton = g.skeleton(0, m);
    let root = materialize(&skeleton, &units);
    let tokens = g.words(n);
    Ok(JointTree::new(tokens, root).expect("generator builds well-formed trees"))
}

/// A generated document in the shape conversion sees it: per-sentence
/// constituency trees, EDU spans that never cross a sentence, the EDU texts,
/// and a discourse skeleton over the EDUs.
#[derive(Clone, Debug)]
pub struct AlignedInstance {
    pub forest: SyntaxForest,
    pub edus: Vec<EduSpan>,
    pub edu_texts: Vec<String>,
    pub skeleton: Skeleton,
}

pub fn generate_aligned(seed: u64, params: &SynthParams) -> Result<AlignedInstance, SynthError> {
    params.check()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        p: params,
    };
    let n = g.rng.random_range(1..=params.max_tokens);
    let sentence_count = g.rng.random_range(1..=params.max_edus.min(n));
    let sentence_bounds = g.cuts(0, n, sentence_count);
    let tokens = g.words(n);
    let mut sentences = Vec::with_capacity(sentence_count);
    let mut edus = Vec::new();
    for w in sentence_bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let root = g.syntax(0, hi - lo, false);
        let toks = tokens[lo..hi]
            .iter()
            .enumerate()
            .map(|(i, t)| Token::new(i, t.text.clone()))
            .collect();
        sentences.push(JointTree::new(toks, root).expect("well-formed sentence"));
        let room = params.max_edus.saturating_sub(edus.len() + sentence_count - sentences.len());
        let parts = g.rng.random_range(1..=(hi - lo).min(room.max(1)).min(3));
        for e in g.cuts(lo, hi, parts).windows(2) {
            edus.push(EduSpan::new(e[0], e[1]));
        }
    }
    let forest = SyntaxForest::from_sentences(sentences).expect("at least one sentence");
    let edu_texts = edus
        .iter()
        .map(|e| {
            tokens[e.start..e.end]
                .iter()
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let root = g.skeleton(0, edus.len());
    let skeleton = Skeleton::from_root(root).expect("generated skeleton is well-formed");
    Ok(AlignedInstance {
        forest,
        edus,
        edu_texts,
        skeleton,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splice::{align_edus, splice_edus};
    use crate::tree::{extract_edus, labeled_spans};

    #[test]
    fn same_seed_same_tree() {
        let p = SynthParams {
            max_tokens: 8,
            ..SynthParams::default()
        };
        let a = generate_synthetic(0, &p).unwrap();
        let b = generate_synthetic(0, &p).unwrap();
        assert_eq!(a, b);
        assert!(a.len() <= 8);
        let differs = (1..5).any(|seed| generate_synthetic(seed, &p).unwrap() != a);
        assert!(differs);
    }

    #[test]
    fn samples_are_valid() {
        let p = SynthParams::default();
        for seed in 0..1000 {
            let t = generate_synthetic(seed, &p).unwrap();
            t.validate().unwrap();
            // every extent labeled at most once
            let spans = labeled_spans(&t);
            let mut extents: Vec<_> = spans.iter().map(|s| s.extent()).collect();
            extents.dedup();
            assert_eq!(extents.len(), spans.len());
        }
    }

    #[test]
    fn generator_audit() {
        let p = SynthParams::default();
        let mut multinuclear = 0;
        let mut chains = 0;
        for seed in 0..100 {
            let t = generate_synthetic(seed, &p).unwrap();
            for s in labeled_spans(&t) {
                match s.label {
                    Label::Discourse(d) if d.form == Nuclearity::MultiNuclear => multinuclear += 1,
                    Label::Syntactic(c) if c.is_chain() => chains += 1,
                    _ => {}
                }
            }
        }
        assert!(multinuclear >= 1);
        assert!(chains >= 1);
    }

    #[test]
    fn degenerate_params() {
        let p = SynthParams {
            max_tokens: 0,
            ..SynthParams::default()
        };
        assert_eq!(generate_synthetic(0, &p), Err(SynthError::NoTokens));
        let p = SynthParams {
            max_edus: 0,
            ..SynthParams::default()
        };
        assert_eq!(generate_synthetic(0, &p), Err(SynthError::NoEdus));
        let p = SynthParams {
            relations: Vec::new(),
            ..SynthParams::default()
        };
        assert_eq!(generate_synthetic(0, &p), Err(SynthError::EmptyInventory));
    }

    #[test]
    fn splice_inverse_on_aligned_instances() {
        let p = SynthParams::default();
        for seed in 0..300 {
            let inst = generate_aligned(seed, &p).unwrap();
            let aligned = align_edus(&inst.edu_texts, inst.forest.tokens()).unwrap();
            assert_eq!(aligned, inst.edus);
            let joint = splice_edus(&inst.skeleton, &inst.edus, &inst.forest).unwrap();
            joint.validate().unwrap();
            assert_eq!(extract_edus(&joint), inst.edus, "seed {seed}");
        }
    }
}
