//! Training with exploration against the dynamic oracle.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::eval::{EvalError, Report};
use crate::math::argmax_masked;
use crate::model::{
    loss_and_gradients, Dropout, Model, ModelConfig, ModelError, ParseError, StepTarget, Vocabulary, UNK,
};
use crate::optim::{Adam, AdamConfig};
use crate::transition::{
    best_label, dynamic_oracle, label_legality, structural_mask, Action, ActionScorer, DecodeMode,
    GoldSpans, ParserState, Phase, TransitionError,
};
use crate::tree::{extract_edus, JointTree};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TrainMode {
    #[default]
    EndToEnd,
    GoldEdus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct TrainConfig {
    /// Probability of following the oracle instead of the model.
    pub beta: f64,
    pub dropout: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Documents held out for model selection. Zero selects on the
    /// training documents themselves.
    pub dev_size: usize,
    /// Chance of replacing a word seen once in training by the unknown word.
    pub unk_replace: f64,
    pub optimizer: AdamConfig,
    pub mode: TrainMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            beta: 0.8,
            dropout: 0.5,
            epochs: 30,
            seed: 0,
            dev_size: 30,
            unk_replace: 0.5,
            optimizer: AdamConfig::default(),
            mode: TrainMode::EndToEnd,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("beta {0} outside [0, 1]")]
    Beta(f64),
    #[error("dropout {0} outside [0, 1)")]
    Dropout(f64),
    #[error("dev size {dev} leaves no training documents out of {total}")]
    DevSize { dev: usize, total: usize },
    #[error("no training documents")]
    Empty,
    #[error("non-finite loss in epoch {epoch}, document {document}: {source}")]
    Diverged {
        epoch: usize,
        document: usize,
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Hook(String),
}

impl TrainConfig {
    pub fn validate(&self, documents: usize) -> Result<(), TrainError> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(TrainError::Beta(self.beta));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(TrainError::Dropout(self.dropout));
        }
        if documents == 0 {
            return Err(TrainError::Empty);
        }
        if self.dev_size >= documents {
            return Err(TrainError::DevSize {
                dev: self.dev_size,
                total: documents,
            });
        }
        Ok(())
    }
}

/// One visited state of a rollout.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutStep {
    pub boundaries: Vec<usize>,
    pub midpoint: Option<usize>,
    pub oracle: Vec<Action>,
    pub target: Action,
    pub followed: Action,
    pub step: StepTarget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub steps: Vec<RolloutStep>,
    pub final_state: ParserState,
}

fn gold_for(tree: &JointTree, mode: TrainMode) -> Result<(ParserState, GoldSpans), TransitionError> {
    Ok(match mode {
        TrainMode::EndToEnd => (ParserState::axiom(tree.len())?, GoldSpans::from_tree(tree)),
        TrainMode::GoldEdus => (
            ParserState::axiom_with_edus(&extract_edus(tree))?,
            GoldSpans::discourse(tree),
        ),
    })
}

/// Walks one document from the axiom. At each state the target is the
/// model's best oracle action; the followed action is the target with
/// probability `beta` and the model's best action otherwise.
pub fn rollout<R: Rng + ?Sized>(
    tree: &JointTree,
    model: &Model,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<Rollout, TrainError> {
    let scorer = model.scorer(tree.tokens())?;
    let labels = model.vocab.labels();
    let (mut state, gold) = gold_for(tree, config.mode)?;
    let mut steps = Vec::with_capacity(4 * tree.len());
    while !state.is_terminal() {
        let oracle = dynamic_oracle(&state, &gold)?;
        let (target, best) = match state.phase() {
            Phase::Structural => {
                let scores = scorer.structural(&state);
                let as_index = |a: &Action| usize::from(*a == Action::Combine);
                let target = oracle
                    .iter()
                    .max_by(|a, b| scores[as_index(a)].total_cmp(&scores[as_index(b)]).then(as_index(b).cmp(&as_index(a))))
                    .expect("oracle is never empty")
                    .clone();
                let pick = argmax_masked(&scores, &structural_mask(&state)).expect("legal action exists");
                (target, if pick == 0 { Action::Shift } else { Action::Combine })
            }
            Phase::LabelPhase => {
                let scores = scorer.label_scores(&state);
                let to_action = |p: usize| match p {
                    0 => Action::NoLabel,
                    p => Action::Label(labels[p - 1].clone()),
                };
                let legal = label_legality(&state, labels);
                let scorable = |a: &Action| match a {
                    Action::NoLabel => legal[0],
                    Action::Label(l) => model.vocab.label_id(l).is_some_and(|i| legal[i + 1]),
                    _ => false,
                };
                let target = match oracle.iter().find(|a| scorable(a)) {
                    Some(a) => a.clone(),
                    None => to_action(argmax_masked(&scores, &legal).ok_or(TrainError::Model(
                        ModelError::Unscorable(String::from("empty label inventory")),
                    ))?),
                };
                let best = best_label(&state, labels, &scores).map(to_action).unwrap_or_else(|| target.clone());
                (target, best)
            }
        };
        let followed = if rng.random_bool(config.beta) { target.clone() } else { best };
        let step = StepTarget::new(&state, &target, &model.vocab)?;
        steps.push(RolloutStep {
            boundaries: state.boundaries().to_vec(),
            midpoint: state.midpoint(),
            oracle,
            target,
            followed: followed.clone(),
            step,
        });
        state.apply(&followed)?;
    }
    Ok(Rollout {
        steps,
        final_state: state,
    })
}

/// Word ids with singletons replaced by the unknown word at rate `p`.
pub fn noisy_ids<R: Rng + ?Sized>(vocab: &Vocabulary, tree: &JointTree, p: f64, rng: &mut R) -> Vec<usize> {
    vocab
        .ids(tree.tokens())
        .into_iter()
        .map(|id| if vocab.is_singleton(id) && rng.random_bool(p) { UNK } else { id })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub dev: Report,
    /// The selection metric for this epoch, a fraction.
    pub dev_score: f64,
    pub is_best: bool,
}

/// Selection metric: overall labeled-span F1 end to end, relation F1 with
/// gold EDUs.
pub fn selection_score(report: &Report, mode: TrainMode) -> f64 {
    match mode {
        TrainMode::EndToEnd => report.overall.prf().f1,
        TrainMode::GoldEdus => report.discourse.relation.prf().f1,
    }
}

/// Parses `docs` with `model` and sums their reports.
pub fn evaluate(model: &Model, docs: &[JointTree], mode: TrainMode) -> Result<Report, TrainError> {
    let mut total = Report::default();
    for d in docs {
        total += evaluate_one(model, d, mode)?;
    }
    Ok(total)
}

pub fn evaluate_one(model: &Model, doc: &JointTree, mode: TrainMode) -> Result<Report, TrainError> {
    let edus;
    let decode = match mode {
        TrainMode::EndToEnd => DecodeMode::EndToEnd,
        TrainMode::GoldEdus => {
            edus = extract_edus(doc);
            DecodeMode::GoldEdus(&edus)
        }
    };
    let out = model.parse(doc.tokens(), decode)?;
    Ok(Report::new(doc, &out.tree)?)
}

/// Callbacks from the training loop.
pub trait TrainHooks {
    /// Evaluation of a frozen model on the dev documents.
    fn evaluate(&mut self, model: &Model, dev: &[JointTree], mode: TrainMode) -> Result<Report, TrainError> {
        evaluate(model, dev, mode)
    }

    fn on_epoch(&mut self, _stats: &EpochStats, _model: &Model) -> Result<(), TrainError> {
        Ok(())
    }
}

/// No-op hooks.
pub struct Quiet;

impl TrainHooks for Quiet {}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub best: Model,
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
    pub train_ids: Vec<usize>,
    pub dev_ids: Vec<usize>,
}

/// Splits, trains for `config.epochs` epochs with per-document updates, and
/// keeps the model with the best dev score (earliest on ties).
pub fn train<H: TrainHooks + ?Sized>(
    treebank: &[JointTree],
    config: &TrainConfig,
    model_config: ModelConfig,
    hooks: &mut H,
) -> Result<TrainOutcome, TrainError> {
    config.validate(treebank.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..treebank.len()).collect();
    order.shuffle(&mut rng);
    let (dev_ids, mut train_ids) = if config.dev_size == 0 {
        (order.clone(), order)
    } else {
        let (d, t) = order.split_at(config.dev_size);
        (d.to_vec(), t.to_vec())
    };
    train_ids.sort_unstable();
    let mut dev_sorted = dev_ids.clone();
    dev_sorted.sort_unstable();
    let train_docs: Vec<JointTree> = train_ids.iter().map(|&i| treebank[i].clone()).collect();
    let dev_docs: Vec<JointTree> = dev_sorted.iter().map(|&i| treebank[i].clone()).collect();

    let vocab = Vocabulary::build(&train_docs);
    let mut model = Model::new(vocab, model_config, config.seed);
    let mut opt = Adam::new(config.optimizer, &model.params);
    let mut best: Option<(f64, usize, Model)> = None;
    let mut history = Vec::with_capacity(config.epochs);
    let mut visit: Vec<usize> = (0..train_docs.len()).collect();

    for epoch in 1..=config.epochs {
        visit.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &d in &visit {
            let doc = &train_docs[d];
            let walk = rollout(doc, &model, config, &mut rng)?;
            let targets: Vec<StepTarget> = walk.steps.into_iter().map(|s| s.step).collect();
            let ids = noisy_ids(&model.vocab, doc, config.unk_replace, &mut rng);
            let dropout = (config.dropout > 0.0).then_some(Dropout {
                rng: &mut rng as &mut dyn RngCore,
                rate: config.dropout,
            });
            let (loss, grad) = loss_and_gradients(&model.params, &ids, &targets, dropout).map_err(|source| {
                TrainError::Diverged {
                    epoch,
                    document: train_ids[d],
                    source,
                }
            })?;
            opt.step(&mut model.params, &grad);
            if !model.params.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    document: train_ids[d],
                    source: ModelError::NonFinite { step: targets.len() },
                });
            }
            epoch_loss += loss;
        }
        let dev = hooks.evaluate(&model, &dev_docs, config.mode)?;
        let score = selection_score(&dev, config.mode);
        let is_best = best.as_ref().is_none_or(|(s, _, _)| score > *s);
        if is_best {
            best = Some((score, epoch, model.clone()));
        }
        let stats = EpochStats {
            epoch,
            loss: epoch_loss,
            dev,
            dev_score: score,
            is_best,
        };
        hooks.on_epoch(&stats, &model)?;
        history.push(stats);
    }
    let (best_epoch, best) = match best {
        Some((_, e, m)) => (e, m),
        None => (0, model),
    };
    Ok(TrainOutcome {
        best,
        best_epoch,
        history,
        train_ids,
        dev_ids: dev_sorted,
    })
}

/// Result of one training run in a sweep over `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub beta: f64,
    pub best_epoch: usize,
    pub dev_score: f64,
}

/// Trains once per value of `beta`, otherwise with `config`, and reports the
/// best dev score of each run.
pub fn beta_sweep(
    treebank: &[JointTree],
    config: &TrainConfig,
    model_config: ModelConfig,
    betas: &[f64],
) -> Result<Vec<SweepPoint>, TrainError> {
    betas
        .iter()
        .map(|&beta| {
            let cfg = TrainConfig { beta, ..*config };
            let out = train(treebank, &cfg, model_config, &mut Quiet)?;
            let dev_score = out
                .history
                .iter()
                .find(|s| s.epoch == out.best_epoch)
                .map_or(0.0, |s| s.dev_score);
            Ok(SweepPoint {
                beta,
                best_epoch: out.best_epoch,
                dev_score,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SynthParams};
    use crate::transition::{label_legality, GoldSpans};
    use alloc::vec;

    fn small() -> ModelConfig {
        ModelConfig {
            word_dim: 8,
            lstm_dim: 8,
            hidden_dim: 8,
        }
    }

    fn docs(k: usize) -> Vec<JointTree> {
        let p = SynthParams {
            max_tokens: 10,
            max_edus: 3,
            ..SynthParams::default()
        };
        (0..k as u64).map(|s| generate_synthetic(s, &p).unwrap()).collect()
    }

    #[test]
    fn beta_one_reproduces_gold() {
        let ds = docs(5);
        let model = Model::new(Vocabulary::build(&ds), small(), 0);
        let cfg = TrainConfig {
            beta: 1.0,
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in &ds {
            let r = rollout(d, &model, &cfg, &mut rng).unwrap();
            let mut got = r.final_state.labeled().to_vec();
            got.sort();
            assert_eq!(GoldSpans::new(got), GoldSpans::from_tree(d));
            assert!(r.steps.iter().all(|s| s.followed == s.target));
        }
    }

    #[test]
    fn targets_are_legal_oracle_actions() {
        let ds = docs(6);
        let model = Model::new(Vocabulary::build(&ds), small(), 1);
        for beta in [0.0, 0.5] {
            let cfg = TrainConfig {
                beta,
                ..TrainConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for d in &ds {
                let r = rollout(d, &model, &cfg, &mut rng).unwrap();
                for s in &r.steps {
                    assert!(s.oracle.contains(&s.target));
                    let st = ParserState::from_parts(d.len(), s.boundaries.clone(), s.midpoint, vec![]).unwrap();
                    assert!(st.is_legal(&s.target));
                    if let Action::Label(l) = &s.target {
                        let legal = label_legality(&st, model.vocab.labels());
                        assert!(legal[model.vocab.label_id(l).unwrap() + 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn rollout_is_seeded() {
        let ds = docs(3);
        let model = Model::new(Vocabulary::build(&ds), small(), 2);
        let cfg = TrainConfig {
            beta: 0.5,
            ..TrainConfig::default()
        };
        for d in &ds {
            let a = rollout(d, &model, &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            let b = rollout(d, &model, &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gold_edu_rollouts_label_discourse_only() {
        let ds = docs(6);
        let model = Model::new(Vocabulary::build(&ds), small(), 2);
        let cfg = TrainConfig {
            beta: 1.0,
            mode: TrainMode::GoldEdus,
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in &ds {
            let r = rollout(d, &model, &cfg, &mut rng).unwrap();
            let mut got = r.final_state.labeled().to_vec();
            got.sort();
            assert_eq!(GoldSpans::new(got), GoldSpans::discourse(d));
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate(31).is_ok());
        assert_eq!(
            TrainConfig::default().validate(30),
            Err(TrainError::DevSize { dev: 30, total: 30 })
        );
        let bad = TrainConfig {
            beta: 1.5,
            ..TrainConfig::default()
        };
        assert_eq!(bad.validate(100), Err(TrainError::Beta(1.5)));
    }

    #[test]
    fn short_training_is_reproducible_and_selects_best() {
        let ds = docs(4);
        let cfg = TrainConfig {
            epochs: 3,
            dev_size: 1,
            ..TrainConfig::default()
        };
        let a = train(&ds, &cfg, small(), &mut Quiet).unwrap();
        let b = train(&ds, &cfg, small(), &mut Quiet).unwrap();
        assert_eq!(a.best.params, b.best.params);
        assert_eq!(a.history.len(), 3);
        let max = a.history.iter().map(|h| h.dev_score).fold(f64::MIN, f64::max);
        assert_eq!(a.history[a.best_epoch - 1].dev_score, max);
        assert_eq!(a.dev_ids.len(), 1);
        assert_eq!(a.train_ids.len(), 3);
    }
}
