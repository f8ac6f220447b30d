//! BiLSTM boundary encoder and the four action scorers.
//!
//! A document `w_0 .. w_{n-1}` is padded with `<s>` and `</s>` and read by
//! two stacked bidirectional LSTM layers. Boundary `p` sits between padded
//! positions `p` and `p + 1`; its feature is the forward states at `p` and
//! the backward states at `p + 1` of both layers. Spans are scored from the
//! features of their boundaries:
//!
//! * shift over `(f_i, f_j)` and combine over `(f_a, f_i, f_j)`, normalized
//!   together;
//! * labels over `(f_i, f_k, f_j)`, one softmax with NoLabel at output 0.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::transition::{
    label_legality, parse_greedy, ActionScorer, DecodeError, DecodeMode, ParseOutput, ParserState,
};
use crate::tree::{Label, Token};

mod lstm;
mod network;
mod tensor;
mod vocab;

pub use lstm::LstmParams;
pub use network::{loss_and_gradients, relu_signs, Dropout, Encoding, StepTarget};
pub use tensor::Matrix;
pub use vocab::{VocabError, Vocabulary, BOS, EOS, UNK};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ModelConfig {
    pub word_dim: usize,
    pub lstm_dim: usize,
    pub hidden_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_dim: 50,
            lstm_dim: 200,
            hidden_dim: 200,
        }
    }
}

/// Two-layer feed-forward net with a rectified hidden layer.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Mlp {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        Mlp {
            w1: Matrix::glorot(hidden, input, rng),
            b1: vec![0.0; hidden],
            w2: Matrix::glorot(output, hidden, rng),
            b2: vec![0.0; output],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Mlp {
            w1: Matrix::zeros(self.w1.rows, self.w1.cols),
            b1: vec![0.0; self.b1.len()],
            w2: Matrix::zeros(self.w2.rows, self.w2.cols),
            b2: vec![0.0; self.b2.len()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("document has no tokens")]
    EmptyDocument,
    #[error("token id {0} outside the embedding table")]
    TokenId(usize),
    #[error("non-finite loss at step {step}")]
    NonFinite { step: usize },
    #[error("tensor {name} has shape {got:?}, expected {expected:?}")]
    Shape {
        name: String,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("step {step} targets output {target} of {outputs}")]
    Target {
        step: usize,
        target: usize,
        outputs: usize,
    },
    #[error("target action {0} is not scorable in its state")]
    Unscorable(String),
}

/// All trainable tensors.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ModelParameters {
    pub config: ModelConfig,
    pub embed: Matrix,
    /// Layer 1 forward, layer 1 backward, layer 2 forward, layer 2 backward.
    pub lstm: [LstmParams; 4],
    pub shift: Mlp,
    pub combine: Mlp,
    pub label: Mlp,
}

impl ModelParameters {
    pub fn new(config: ModelConfig, vocab_size: usize, label_outputs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ModelConfig {
            word_dim: dw,
            lstm_dim: dh,
            hidden_dim: hid,
        } = config;
        let embed_scale = crate::math::sqrt(3.0 / dw as f64);
        let embed = Matrix::uniform(vocab_size, dw, embed_scale, &mut rng);
        let lstm = [
            LstmParams::new(dw, dh, &mut rng),
            LstmParams::new(dw, dh, &mut rng),
            LstmParams::new(2 * dh, dh, &mut rng),
            LstmParams::new(2 * dh, dh, &mut rng),
        ];
        let feat = 4 * dh;
        ModelParameters {
            config,
            embed,
            lstm,
            shift: Mlp::new(2 * feat, hid, 1, &mut rng),
            combine: Mlp::new(3 * feat, hid, 1, &mut rng),
            label: Mlp::new(3 * feat, hid, label_outputs, &mut rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParameters {
            config: self.config,
            embed: Matrix::zeros(self.embed.rows, self.embed.cols),
            lstm: [
                self.lstm[0].zeros_like(),
                self.lstm[1].zeros_like(),
                self.lstm[2].zeros_like(),
                self.lstm[3].zeros_like(),
            ],
            shift: self.shift.zeros_like(),
            combine: self.combine.zeros_like(),
            label: self.label.zeros_like(),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.embed.rows
    }

    pub fn label_outputs(&self) -> usize {
        self.label.b2.len()
    }

    /// Dimension of one boundary feature.
    pub fn feature_dim(&self) -> usize {
        4 * self.config.lstm_dim
    }

    /// Tensor names in a fixed order.
    pub fn tensor_names() -> Vec<String> {
        let mut names = vec![String::from("embed")];
        for cell in ["l1f", "l1b", "l2f", "l2b"] {
            for part in ["w", "u", "b"] {
                names.push(alloc::format!("{cell}.{part}"));
            }
        }
        for head in ["shift", "combine", "label"] {
            for part in ["w1", "b1", "w2", "b2"] {
                names.push(alloc::format!("{head}.{part}"));
            }
        }
        names
    }

    /// Every tensor as a flat slice, in [`tensor_names`](Self::tensor_names) order.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.embed.data];
        for l in &self.lstm {
            out.extend([&l.w.data[..], &l.u.data[..], &l.b[..]]);
        }
        for m in [&self.shift, &self.combine, &self.label] {
            out.extend([&m.w1.data[..], &m.b1[..], &m.w2.data[..], &m.b2[..]]);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.embed.data];
        for l in &mut self.lstm {
            out.push(&mut l.w.data);
            out.push(&mut l.u.data);
            out.push(&mut l.b);
        }
        for m in [&mut self.shift, &mut self.combine, &mut self.label] {
            out.push(&mut m.w1.data);
            out.push(&mut m.b1);
            out.push(&mut m.w2.data);
            out.push(&mut m.b2);
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Checks every shape against `config`, `vocab_size` and `label_outputs`.
    pub fn check_shapes(&self, vocab_size: usize, label_outputs: usize) -> Result<(), ModelError> {
        let ModelConfig {
            word_dim: dw,
            lstm_dim: dh,
            hidden_dim: hid,
        } = self.config;
        let feat = 4 * dh;
        let mut expected: Vec<(usize, usize)> = vec![(vocab_size, dw)];
        for input in [dw, dw, 2 * dh, 2 * dh] {
            expected.extend([(4 * dh, input), (4 * dh, dh), (4 * dh, 1)]);
        }
        for (input, out) in [(2 * feat, 1), (3 * feat, 1), (3 * feat, label_outputs)] {
            expected.extend([(hid, input), (hid, 1), (out, hid), (out, 1)]);
        }
        let mut got: Vec<(usize, usize)> = vec![(self.embed.rows, self.embed.cols)];
        for l in &self.lstm {
            got.extend([(l.w.rows, l.w.cols), (l.u.rows, l.u.cols), (l.b.len(), 1)]);
        }
        for m in [&self.shift, &self.combine, &self.label] {
            got.extend([(m.w1.rows, m.w1.cols), (m.b1.len(), 1), (m.w2.rows, m.w2.cols), (m.b2.len(), 1)]);
        }
        let names = Self::tensor_names();
        let tensors = self.tensors();
        for (k, (g, e)) in got.iter().zip(&expected).enumerate() {
            if g != e || tensors[k].len() != e.0 * e.1 {
                return Err(ModelError::Shape {
                    name: names[k].clone(),
                    got: *g,
                    expected: *e,
                });
            }
        }
        Ok(())
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &ModelParameters, scale: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            tensor::axpy(scale, b, a);
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|t| t.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }
}

/// Vocabulary plus parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub vocab: Vocabulary,
    pub params: ModelParameters,
}

impl Model {
    pub fn new(vocab: Vocabulary, config: ModelConfig, seed: u64) -> Self {
        let params = ModelParameters::new(config, vocab.len(), vocab.label_outputs(), seed);
        Model { vocab, params }
    }

    /// Pairs checked parameters with a vocabulary.
    pub fn from_parts(vocab: Vocabulary, params: ModelParameters) -> Result<Self, ModelError> {
        params.check_shapes(vocab.len(), vocab.label_outputs())?;
        Ok(Model { vocab, params })
    }

    /// Encodes `tokens` with dropout off.
    pub fn scorer(&self, tokens: &[Token]) -> Result<FeatureScorer<'_>, ModelError> {
        let ids = self.vocab.ids(tokens);
        let encoding = Encoding::new(&self.params, &ids, None)?;
        Ok(FeatureScorer {
            params: &self.params,
            labels: self.vocab.labels(),
            encoding,
        })
    }

    pub fn parse(&self, tokens: &[Token], mode: DecodeMode<'_>) -> Result<ParseOutput, ParseError> {
        let scorer = self.scorer(tokens)?;
        Ok(parse_greedy(&scorer, tokens, mode)?)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Scores of a frozen model for one encoded document.
pub struct FeatureScorer<'a> {
    params: &'a ModelParameters,
    labels: &'a [Label],
    encoding: Encoding,
}

impl<'a> FeatureScorer<'a> {
    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }
}

impl ActionScorer for FeatureScorer<'_> {
    fn len(&self) -> usize {
        self.encoding.len()
    }

    fn labels(&self) -> &[Label] {
        self.labels
    }

    fn structural(&self, state: &ParserState) -> [f64; 2] {
        self.encoding.score_structural(self.params, state)
    }

    fn label_scores(&self, state: &ParserState) -> Vec<f64> {
        self.encoding
            .score_labels(self.params, state, &label_legality(state, self.labels))
    }
}
