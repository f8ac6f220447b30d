//! Exhaustive and numerical checks of the oracle and the gradients.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{loss_and_gradients, Dropout, Model, ModelConfig, ModelParameters, StepTarget, Vocabulary};
use crate::synth::{generate_synthetic, SynthParams};
use crate::train::{rollout, TrainConfig};
use crate::transition::{dynamic_oracle, reachable_count, Action, GoldSpans, ParserState, Phase};
use crate::tree::{JointTree, Label};

/// Largest number of gold spans any completion of `state` can still add,
/// by exhaustive search. Labels never change what is reachable, so the
/// search runs over structure only and each label phase adds one when its
/// span is gold.
pub struct Completion<'a> {
    gold: &'a GoldSpans,
    memo: BTreeMap<(Vec<usize>, Option<usize>), usize>,
}

impl<'a> Completion<'a> {
    pub fn new(gold: &'a GoldSpans) -> Self {
        Completion {
            gold,
            memo: BTreeMap::new(),
        }
    }

    /// Best future gain from `state`, ignoring what it already labeled.
    pub fn future(&mut self, state: &ParserState) -> usize {
        if state.is_terminal() {
            return 0;
        }
        let key = (state.boundaries().to_vec(), state.midpoint());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let bare = ParserState::from_parts(state.n(), key.0.clone(), key.1, Vec::new())
            .expect("state parts are consistent");
        let value = match bare.phase() {
            Phase::LabelPhase => {
                let (i, j) = bare.top_span().expect("label phase has a top span");
                let gain = usize::from(self.gold.label_at(i, j).is_some());
                let next = match self.gold.label_at(i, j) {
                    Some(l) => Action::Label(l.clone()),
                    None => Action::Label(Label::nt(WRONG)),
                };
                gain + self.future(&bare.applied(&next).expect("labels are always legal"))
            }
            Phase::Structural => [Action::Shift, Action::Combine]
                .iter()
                .filter(|a| bare.is_legal(a))
                .map(|a| self.future(&bare.applied(a).expect("legal")))
                .max()
                .expect("a structural state has a legal action"),
        };
        self.memo.insert(key, value);
        value
    }

    /// Final matched count of the best completion.
    pub fn best_total(&mut self, state: &ParserState) -> usize {
        let matched = state.labeled().iter().filter(|s| self.gold.contains(s)).count();
        matched + self.future(state)
    }

    /// Actions whose best completion is optimal. In the label phase the
    /// candidates are NoLabel, the gold label of the top span, and one label
    /// outside the inventory.
    pub fn optimal_actions(&mut self, state: &ParserState) -> Vec<Action> {
        let candidates: Vec<Action> = match state.phase() {
            Phase::Structural => vec![Action::Shift, Action::Combine],
            Phase::LabelPhase => {
                let (i, j) = state.top_span().expect("label phase has a top span");
                let mut c = vec![Action::NoLabel, Action::Label(Label::nt(WRONG))];
                c.extend(self.gold.label_at(i, j).cloned().map(Action::Label));
                c
            }
        };
        let scored: Vec<(Action, usize)> = candidates
            .into_iter()
            .filter(|a| state.is_legal(a))
            .map(|a| {
                let v = self.best_total(&state.applied(&a).expect("legal"));
                (a, v)
            })
            .collect();
        let best = scored.iter().map(|p| p.1).max().unwrap_or(0);
        scored.into_iter().filter(|p| p.1 == best).map(|p| p.0).collect()
    }
}

const WRONG: &str = "WRONG";

/// A random legal state reached from the axiom. Label phases pick the gold
/// label, NoLabel, or a wrong label at random.
pub fn random_state<R: Rng + ?Sized>(tree: &JointTree, gold: &GoldSpans, rng: &mut R) -> ParserState {
    let mut state = ParserState::axiom(tree.len()).expect("trees are non-empty");
    let total = 4 * tree.len() - 2;
    let steps = rng.random_range(0..total);
    for _ in 0..steps {
        let action = match state.phase() {
            Phase::Structural => {
                let legal: Vec<Action> = [Action::Shift, Action::Combine]
                    .into_iter()
                    .filter(|a| state.is_legal(a))
                    .collect();
                legal.choose(rng).expect("non-terminal").clone()
            }
            Phase::LabelPhase => {
                let (i, j) = state.top_span().expect("label phase");
                let mut options = vec![Action::Label(Label::nt(WRONG))];
                if let Some(l) = gold.label_at(i, j) {
                    options.push(Action::Label(l.clone()));
                }
                if state.nolabel_allowed() {
                    options.push(Action::NoLabel);
                }
                options.choose(rng).expect("non-empty").clone()
            }
        };
        state.apply(&action).expect("chosen among legal actions");
        if state.is_terminal() {
            break;
        }
    }
    state
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleReport {
    pub states: usize,
    pub structural: usize,
    pub label: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares the dynamic oracle with exhaustive search on `states` random
/// non-terminal states over synthetic documents of at most `max_tokens`.
pub fn check_oracle(states: usize, max_tokens: usize, seed: u64) -> OracleReport {
    let params = SynthParams {
        max_tokens,
        max_edus: max_tokens.min(4),
        ..SynthParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::default();
    let mut doc_seed = seed.wrapping_mul(1_000_003);
    while report.states < states {
        doc_seed = doc_seed.wrapping_add(1);
        let tree = generate_synthetic(doc_seed, &params).expect("valid synthetic parameters");
        let gold = GoldSpans::from_tree(&tree);
        let mut search = Completion::new(&gold);
        for _ in 0..8 {
            let state = random_state(&tree, &gold, &mut rng);
            if state.is_terminal() || report.states >= states {
                continue;
            }
            report.states += 1;
            let reach = reachable_count(&state, &gold);
            let best = search.best_total(&state);
            if reach != best {
                report.failures.push(format!(
                    "doc {doc_seed}: reachable_count {reach} != best completion {best} at {:?}/{:?}",
                    state.boundaries(),
                    state.midpoint()
                ));
            }
            let oracle = dynamic_oracle(&state, &gold).expect("non-terminal");
            let brute = search.optimal_actions(&state);
            // structural sets must agree; a label-phase answer must be
            // optimal, and the only optimum when the span is gold
            let agrees = match state.phase() {
                Phase::Structural => {
                    report.structural += 1;
                    oracle == brute
                }
                Phase::LabelPhase => {
                    report.label += 1;
                    let (i, j) = state.top_span().expect("label phase");
                    oracle.len() == 1
                        && brute.contains(&oracle[0])
                        && (gold.label_at(i, j).is_none() || brute == oracle)
                }
            };
            if !agrees {
                report.failures.push(format!(
                    "doc {doc_seed}: oracle {oracle:?} != exhaustive {brute:?} at {:?}/{:?}",
                    state.boundaries(),
                    state.midpoint()
                ));
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradReport {
    pub checked: usize,
    /// Coordinates dropped because a rectifier switched inside `[x - h, x + h]`.
    pub kinks: usize,
    pub max_relative: f64,
    pub slices: Vec<String>,
    pub failures: Vec<String>,
}

impl GradReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckConfig {
    pub documents: usize,
    pub slices: usize,
    pub coords_per_slice: usize,
    pub step: f64,
    pub tolerance: f64,
    pub model: ModelConfig,
    pub dropout: f64,
    pub max_tokens: usize,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            documents: 3,
            slices: 8,
            coords_per_slice: 6,
            step: 1e-4,
            tolerance: 1e-4,
            model: ModelConfig {
                word_dim: 5,
                lstm_dim: 4,
                hidden_dim: 6,
            },
            dropout: 0.5,
            max_tokens: 8,
            seed: 0,
        }
    }
}

/// `|a - n| / max(|a|, |n|)`, zero when both vanish.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// Central differences against the analytic gradient on random parameter
/// slices of random documents. Targets come from exploratory rollouts and
/// dropout is on with the same masks for every evaluation.
pub fn check_gradients(cfg: &GradCheckConfig) -> GradReport {
    let params = SynthParams {
        max_tokens: cfg.max_tokens,
        max_edus: 3,
        ..SynthParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let docs: Vec<JointTree> = (0..)
        .map(|s| generate_synthetic(cfg.seed.wrapping_add(s), &params).expect("valid parameters"))
        .filter(|t| t.len() >= 3)
        .take(cfg.documents)
        .collect();
    let model = Model::new(Vocabulary::build(&docs), cfg.model, cfg.seed);
    let names = ModelParameters::tensor_names();
    let mut report = GradReport::default();
    let explore = TrainConfig {
        beta: 0.7,
        ..TrainConfig::default()
    };
    for (d, doc) in docs.iter().enumerate() {
        let walk = rollout(doc, &model, &explore, &mut rng).expect("rollout on a training document");
        let targets: Vec<StepTarget> = walk.steps.into_iter().map(|s| s.step).collect();
        let ids = model.vocab.ids(doc.tokens());
        let mask_seed = rng.random::<u64>();
        let eval = |p: &ModelParameters| {
            let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed);
            let dropout = (cfg.dropout > 0.0).then_some(Dropout {
                rng: &mut mrng as &mut dyn RngCore,
                rate: cfg.dropout,
            });
            loss_and_gradients(p, &ids, &targets, dropout).expect("finite loss")
        };
        let (_, grad) = eval(&model.params);
        let pattern = |p: &ModelParameters| relu_pattern(p, &ids, &targets, mask_seed, cfg.dropout);
        for _ in 0..cfg.slices {
            let t = rng.random_range(0..names.len());
            report.slices.push(format!("doc {d}: {}", names[t]));
            let len = model.params.tensors()[t].len();
            let candidates: Vec<usize> = if t == 0 {
                // only rows of words in this document move
                let dw = cfg.model.word_dim;
                let mut rows: Vec<usize> = ids.clone();
                rows.extend([crate::model::BOS, crate::model::EOS]);
                rows.iter().flat_map(|&r| r * dw..(r + 1) * dw).collect()
            } else {
                (0..len).collect()
            };
            let mut done = 0;
            let mut attempts = 0;
            while done < cfg.coords_per_slice && attempts < 20 * cfg.coords_per_slice {
                attempts += 1;
                let c = *candidates.choose(&mut rng).expect("tensor is non-empty");
                let mut plus = model.params.clone();
                plus.tensors_mut()[t][c] += cfg.step;
                let mut minus = model.params.clone();
                minus.tensors_mut()[t][c] -= cfg.step;
                if pattern(&plus) != pattern(&minus) {
                    report.kinks += 1;
                    continue;
                }
                let numeric = (eval(&plus).0 - eval(&minus).0) / (2.0 * cfg.step);
                let analytic = grad.tensors()[t][c];
                let rel = relative_error(analytic, numeric);
                report.checked += 1;
                done += 1;
                report.max_relative = report.max_relative.max(rel);
                if rel > cfg.tolerance {
                    report.failures.push(format!(
                        "doc {d} {}[{c}]: analytic {analytic:e} numeric {numeric:e} rel {rel:e}",
                        names[t]
                    ));
                }
            }
        }
    }
    report
}

/// Signs of every rectifier input in one loss evaluation.
fn relu_pattern(p: &ModelParameters, ids: &[usize], targets: &[StepTarget], mask_seed: u64, rate: f64) -> Vec<bool> {
    let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed);
    let dropout = (rate > 0.0).then_some(Dropout {
        rng: &mut mrng as &mut dyn RngCore,
        rate,
    });
    crate::model::relu_signs(p, ids, targets, dropout)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_oracle_sweep() {
        let r = check_oracle(150, 5, 1);
        assert!(r.passed(), "{:?}", &r.failures[..r.failures.len().min(5)]);
        assert!(r.structural > 0 && r.label > 0);
    }

    #[test]
    fn small_gradient_check() {
        let cfg = GradCheckConfig {
            documents: 1,
            slices: 4,
            coords_per_slice: 3,
            ..GradCheckConfig::default()
        };
        let r = check_gradients(&cfg);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn relative_error_convention() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 0.5), 0.5);
    }
}
