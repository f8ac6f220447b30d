use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::tree::{labeled_spans, JointTree, Label, Token};

pub const UNK: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;

const RESERVED: [&str; 3] = ["<unk>", "<s>", "</s>"];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("reserved word entries are missing or out of place")]
    Reserved,
    #[error("word {0:?} listed twice")]
    DuplicateWord(String),
    #[error("label {0} listed twice")]
    DuplicateLabel(String),
    #[error("{words} words but {counts} counts")]
    Counts { words: usize, counts: usize },
}

/// Word ids with training counts, and the label inventory. Ids 0..3 are
/// the unknown word and the two padding symbols. Label output index 0 is
/// NoLabel, so inventory entry `i` scores at output `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<usize>,
    index: BTreeMap<String, usize>,
    labels: Vec<Label>,
    label_index: BTreeMap<Label, usize>,
}

impl Vocabulary {
    /// Words and label chains observed in `trees`.
    pub fn build(trees: &[JointTree]) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut labels = Vec::new();
        for t in trees {
            for tok in t.tokens() {
                *counts.entry(tok.text.as_str()).or_default() += 1;
            }
            labels.extend(labeled_spans(t).into_iter().map(|s| s.label));
        }
        labels.sort();
        labels.dedup();
        let mut words: Vec<String> = RESERVED.iter().map(ToString::to_string).collect();
        let mut word_counts = alloc::vec![0; RESERVED.len()];
        for (w, c) in counts {
            if RESERVED.contains(&w) {
                continue;
            }
            words.push(w.to_string());
            word_counts.push(c);
        }
        Self::from_parts(words, word_counts, labels).expect("built from distinct keys")
    }

    pub fn from_parts(
        words: Vec<String>,
        counts: Vec<usize>,
        labels: Vec<Label>,
    ) -> Result<Self, VocabError> {
        if words.len() != counts.len() {
            return Err(VocabError::Counts {
                words: words.len(),
                counts: counts.len(),
            });
        }
        if words.len() < RESERVED.len() || words.iter().zip(RESERVED).any(|(w, r)| w != r) {
            return Err(VocabError::Reserved);
        }
        let mut index = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(VocabError::DuplicateWord(w.clone()));
            }
        }
        let mut label_index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if label_index.insert(l.clone(), i).is_some() {
                return Err(VocabError::DuplicateLabel(l.to_string()));
            }
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            labels,
            label_index,
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn word_id(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn ids(&self, tokens: &[Token]) -> Vec<usize> {
        tokens.iter().map(|t| self.word_id(&t.text)).collect()
    }

    pub fn is_singleton(&self, id: usize) -> bool {
        id >= RESERVED.len() && self.counts[id] == 1
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Position of `label` in the inventory.
    pub fn label_id(&self, label: &Label) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    /// Number of label outputs, NoLabel included.
    pub fn label_outputs(&self) -> usize {
        self.labels.len() + 1
    }
}
