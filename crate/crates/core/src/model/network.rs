//! Encoder passes, scoring heads and the cross-entropy gradient.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::lstm::{self, LstmTrace};
use super::{Mlp, ModelError, ModelParameters, Vocabulary, BOS, EOS};
use crate::math::{exp, log_softmax_masked};
use crate::transition::{label_legality, structural_mask, Action, ParserState, Phase};

/// Inverted dropout: kept units are scaled by `1 / (1 - rate)`.
pub struct Dropout<'a> {
    pub rng: &'a mut dyn RngCore,
    pub rate: f64,
}

impl Dropout<'_> {
    fn mask(&mut self, len: usize) -> Vec<f64> {
        let keep = 1.0 / (1.0 - self.rate);
        (0..len)
            .map(|_| if self.rng.random_bool(self.rate) { 0.0 } else { keep })
            .collect()
    }
}

/// Forward pass of the encoder for one document, with everything the
/// backward pass needs.
#[derive(Clone, Debug)]
pub struct Encoding {
    ids: Vec<usize>,
    x1: Vec<Vec<f64>>,
    l1: [LstmTrace; 2],
    m1: Option<[Vec<Vec<f64>>; 2]>,
    x2: Vec<Vec<f64>>,
    l2: [LstmTrace; 2],
    m2: Option<[Vec<Vec<f64>>; 2]>,
    features: Vec<Vec<f64>>,
}

fn apply_mask(h: &[f64], m: Option<&Vec<f64>>) -> Vec<f64> {
    match m {
        Some(m) => h.iter().zip(m).map(|(a, b)| a * b).collect(),
        None => h.to_vec(),
    }
}

fn concat(parts: &[&[f64]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
    for p in parts {
        out.extend_from_slice(p);
    }
    out
}

impl Encoding {
    /// Encodes word ids `ids` (without padding).
    pub fn new(
        params: &ModelParameters,
        ids: &[usize],
        mut dropout: Option<&mut Dropout<'_>>,
    ) -> Result<Self, ModelError> {
        if ids.is_empty() {
            return Err(ModelError::EmptyDocument);
        }
        if let Some(&bad) = ids.iter().find(|&&id| id >= params.vocab_size()) {
            return Err(ModelError::TokenId(bad));
        }
        let dh = params.config.lstm_dim;
        let mut padded = Vec::with_capacity(ids.len() + 2);
        padded.push(BOS);
        padded.extend_from_slice(ids);
        padded.push(EOS);
        let len = padded.len();

        let x1: Vec<Vec<f64>> = padded.iter().map(|&id| params.embed.row(id).to_vec()).collect();
        let l1 = [
            lstm::forward(&params.lstm[0], &x1, false),
            lstm::forward(&params.lstm[1], &x1, true),
        ];
        let m1 = dropout
            .as_deref_mut()
            .map(|d| [0, 1].map(|_| (0..len).map(|_| d.mask(dh)).collect::<Vec<_>>()));
        let x2: Vec<Vec<f64>> = (0..len)
            .map(|t| {
                let f = apply_mask(&l1[0].h[t], m1.as_ref().map(|m| &m[0][t]));
                let b = apply_mask(&l1[1].h[t], m1.as_ref().map(|m| &m[1][t]));
                concat(&[&f, &b])
            })
            .collect();
        let l2 = [
            lstm::forward(&params.lstm[2], &x2, false),
            lstm::forward(&params.lstm[3], &x2, true),
        ];
        let m2 = dropout
            .as_mut()
            .map(|d| [0, 1].map(|_| (0..len).map(|_| d.mask(dh)).collect::<Vec<_>>()));
        let features = (0..len - 1)
            .map(|p| {
                let o2f = apply_mask(&l2[0].h[p], m2.as_ref().map(|m| &m[0][p]));
                let o2b = apply_mask(&l2[1].h[p + 1], m2.as_ref().map(|m| &m[1][p + 1]));
                concat(&[&x2[p][..dh], &x2[p + 1][dh..], &o2f, &o2b])
            })
            .collect();
        Ok(Encoding {
            ids: padded,
            x1,
            l1,
            m1,
            x2,
            l2,
            m2,
            features,
        })
    }

    /// Number of tokens.
    pub fn len(&self) -> usize {
        self.features.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `n + 1` boundary features.
    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    /// Log-probabilities of Shift and Combine; an illegal action gets
    /// negative infinity.
    pub fn score_structural(&self, params: &ModelParameters, state: &ParserState) -> [f64; 2] {
        let legal = structural_mask(state);
        assert!(legal[0] || legal[1], "no structural action is legal");
        match legal {
            [true, false] => [0.0, f64::NEG_INFINITY],
            [false, true] => [f64::NEG_INFINITY, 0.0],
            _ => {
                let (a, i, j) = structural_boundaries(state).expect("both actions legal");
                let sh = head(&params.shift, concat(&[&self.features[i], &self.features[j]]), None);
                let cb = head(
                    &params.combine,
                    concat(&[&self.features[a], &self.features[i], &self.features[j]]),
                    None,
                );
                let lp = log_softmax_masked(&[sh.out[0], cb.out[0]], &[true, true]);
                [lp[0], lp[1]]
            }
        }
    }

    /// Log-probabilities over NoLabel and the inventory for the top span,
    /// restricted to `mask`.
    pub fn score_labels(&self, params: &ModelParameters, state: &ParserState, mask: &[bool]) -> Vec<f64> {
        let (i, j) = state.top_span().expect("label phase has a top span");
        let k = state.midpoint().expect("label phase has a midpoint");
        let pass = head(
            &params.label,
            concat(&[&self.features[i], &self.features[k], &self.features[j]]),
            None,
        );
        log_softmax_masked(&pass.out, mask)
    }

    /// Backpropagates boundary-feature gradients `dfeat` into `grad`.
    pub fn backward(&self, params: &ModelParameters, dfeat: &[Vec<f64>], grad: &mut ModelParameters) {
        let dh = params.config.lstm_dim;
        let len = self.ids.len();
        let mut do1 = [vec![vec![0.0; dh]; len], vec![vec![0.0; dh]; len]];
        let mut dh2 = [vec![vec![0.0; dh]; len], vec![vec![0.0; dh]; len]];
        for (p, d) in dfeat.iter().enumerate() {
            add(&mut do1[0][p], &d[..dh]);
            add(&mut do1[1][p + 1], &d[dh..2 * dh]);
            add(&mut dh2[0][p], &d[2 * dh..3 * dh]);
            add(&mut dh2[1][p + 1], &d[3 * dh..]);
        }
        if let Some(m2) = &self.m2 {
            for (dh, masks) in dh2.iter_mut().zip(m2) {
                for (d, m) in dh.iter_mut().zip(masks) {
                    mul(d, m);
                }
            }
        }
        let mut dx2 = vec![vec![0.0; 2 * dh]; len];
        for (dir, dh) in dh2.iter().enumerate() {
            let (p, g) = (&params.lstm[2 + dir], &mut grad.lstm[2 + dir]);
            lstm::backward(p, &self.x2, &self.l2[dir], dh, g, &mut dx2);
        }
        for (t, d) in dx2.iter().enumerate() {
            add(&mut do1[0][t], &d[..dh]);
            add(&mut do1[1][t], &d[dh..]);
        }
        if let Some(m1) = &self.m1 {
            for (dout, masks) in do1.iter_mut().zip(m1) {
                for (d, m) in dout.iter_mut().zip(masks) {
                    mul(d, m);
                }
            }
        }
        let dw = params.config.word_dim;
        let mut dx1 = vec![vec![0.0; dw]; len];
        for (dir, dout) in do1.iter().enumerate() {
            let (p, g) = (&params.lstm[dir], &mut grad.lstm[dir]);
            lstm::backward(p, &self.x1, &self.l1[dir], dout, g, &mut dx1);
        }
        for (&id, d) in self.ids.iter().zip(&dx1) {
            add(grad.embed.row_mut(id), d);
        }
    }
}

fn add(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn mul(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x *= y;
    }
}

/// `(a, i, j)`: below-left boundary and top span, when both structural
/// actions are open.
fn structural_boundaries(state: &ParserState) -> Option<(usize, usize, usize)> {
    let (i, j) = state.top_span()?;
    Some((state.below_left()?, i, j))
}

struct HeadPass {
    x: Vec<f64>,
    pre: Vec<f64>,
    mask: Option<Vec<f64>>,
    out: Vec<f64>,
}

fn head(m: &Mlp, x: Vec<f64>, dropout: Option<&mut Dropout<'_>>) -> HeadPass {
    let mut pre = m.b1.clone();
    m.w1.matvec_add(&x, &mut pre);
    let mask = dropout.map(|d| d.mask(pre.len()));
    let mut hidden: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
    if let Some(mask) = &mask {
        mul(&mut hidden, mask);
    }
    let mut out = m.b2.clone();
    m.w2.matvec_add(&hidden, &mut out);
    HeadPass { x, pre, mask, out }
}

/// Accumulates head gradients for output gradient `dout`; returns the
/// input gradient.
fn head_backward(m: &Mlp, pass: &HeadPass, dout: &[f64], g: &mut Mlp) -> Vec<f64> {
    let mut hidden: Vec<f64> = pass.pre.iter().map(|&v| v.max(0.0)).collect();
    if let Some(mask) = &pass.mask {
        mul(&mut hidden, mask);
    }
    g.w2.outer_add(dout, &hidden);
    add(&mut g.b2, dout);
    let mut dhid = vec![0.0; hidden.len()];
    m.w2.matvec_t_add(dout, &mut dhid);
    for (u, d) in dhid.iter_mut().enumerate() {
        let gate = if pass.pre[u] > 0.0 { 1.0 } else { 0.0 };
        *d *= gate * pass.mask.as_ref().map_or(1.0, |mk| mk[u]);
    }
    g.w1.outer_add(&dhid, &pass.x);
    add(&mut g.b1, &dhid);
    let mut dx = vec![0.0; pass.x.len()];
    m.w1.matvec_t_add(&dhid, &mut dx);
    dx
}

/// One supervised decision, reduced to the boundaries its scorer reads.
#[derive(Clone, Debug, PartialEq)]
pub enum StepTarget {
    /// `spans` is `None` when only one structural action is legal.
    Structural {
        spans: Option<(usize, usize, usize)>,
        target: usize,
    },
    Label {
        i: usize,
        k: usize,
        j: usize,
        mask: Vec<bool>,
        target: usize,
    },
}

impl StepTarget {
    /// The decision to take `action` in `state`.
    pub fn new(state: &ParserState, action: &Action, vocab: &Vocabulary) -> Result<Self, ModelError> {
        let unscorable = || ModelError::Unscorable(action.to_string());
        match (state.phase(), action) {
            (Phase::Structural, Action::Shift | Action::Combine) => {
                if !state.is_legal(action) {
                    return Err(unscorable());
                }
                let both = structural_mask(state) == [true, true];
                Ok(StepTarget::Structural {
                    spans: if both { structural_boundaries(state) } else { None },
                    target: usize::from(*action == Action::Combine),
                })
            }
            (Phase::LabelPhase, Action::Label(_) | Action::NoLabel) => {
                let target = match action {
                    Action::Label(l) => vocab.label_id(l).ok_or_else(unscorable)? + 1,
                    _ => 0,
                };
                let mask = label_legality(state, vocab.labels());
                if !mask[target] {
                    return Err(unscorable());
                }
                let (i, j) = state.top_span().expect("label phase has a top span");
                let k = state.midpoint().expect("label phase has a midpoint");
                Ok(StepTarget::Label { i, k, j, mask, target })
            }
            _ => Err(unscorable()),
        }
    }
}

/// Summed negative log-likelihood of `targets` for the document `ids`, and
/// its gradient with respect to every parameter.
pub fn loss_and_gradients(
    params: &ModelParameters,
    ids: &[usize],
    targets: &[StepTarget],
    mut dropout: Option<Dropout<'_>>,
) -> Result<(f64, ModelParameters), ModelError> {
    let mut grad = params.zeros_like();
    if targets.is_empty() {
        return Ok((0.0, grad));
    }
    let enc = Encoding::new(params, ids, dropout.as_mut())?;
    let f = &enc.features;
    let fd = params.feature_dim();
    let mut dfeat = vec![vec![0.0; fd]; f.len()];
    let mut loss = 0.0;
    for (step, t) in targets.iter().enumerate() {
        match t {
            StepTarget::Structural { spans: None, .. } => {}
            &StepTarget::Structural {
                spans: Some((a, i, j)),
                target,
            } => {
                if target > 1 || a >= f.len() || i >= f.len() || j >= f.len() {
                    return Err(ModelError::Target { step, target, outputs: 2 });
                }
                let sh = head(&params.shift, concat(&[&f[i], &f[j]]), dropout.as_mut());
                let cb = head(&params.combine, concat(&[&f[a], &f[i], &f[j]]), dropout.as_mut());
                let lp = log_softmax_masked(&[sh.out[0], cb.out[0]], &[true, true]);
                let l = -lp[target];
                if !l.is_finite() {
                    return Err(ModelError::NonFinite { step });
                }
                loss += l;
                let d: Vec<f64> = (0..2)
                    .map(|o| exp(lp[o]) - if o == target { 1.0 } else { 0.0 })
                    .collect();
                let dx = head_backward(&params.shift, &sh, &d[..1], &mut grad.shift);
                add(&mut dfeat[i], &dx[..fd]);
                add(&mut dfeat[j], &dx[fd..]);
                let dx = head_backward(&params.combine, &cb, &d[1..], &mut grad.combine);
                add(&mut dfeat[a], &dx[..fd]);
                add(&mut dfeat[i], &dx[fd..2 * fd]);
                add(&mut dfeat[j], &dx[2 * fd..]);
            }
            StepTarget::Label {
                i,
                k,
                j,
                mask,
                target,
            } => {
                let (i, k, j, target) = (*i, *k, *j, *target);
                let outputs = params.label_outputs();
                if target >= outputs || mask.len() != outputs || j >= f.len() {
                    return Err(ModelError::Target { step, target, outputs });
                }
                let pass = head(&params.label, concat(&[&f[i], &f[k], &f[j]]), dropout.as_mut());
                let lp = log_softmax_masked(&pass.out, mask);
                let l = -lp[target];
                if !l.is_finite() {
                    return Err(ModelError::NonFinite { step });
                }
                loss += l;
                let d: Vec<f64> = lp
                    .iter()
                    .enumerate()
                    .map(|(o, &v)| {
                        let p = if mask[o] { exp(v) } else { 0.0 };
                        p - if o == target { 1.0 } else { 0.0 }
                    })
                    .collect();
                let dx = head_backward(&params.label, &pass, &d, &mut grad.label);
                add(&mut dfeat[i], &dx[..fd]);
                add(&mut dfeat[k], &dx[fd..2 * fd]);
                add(&mut dfeat[j], &dx[2 * fd..]);
            }
        }
    }
    enc.backward(params, &dfeat, &mut grad);
    Ok((loss, grad))
}

/// Signs of every rectifier input in the loss computation of
/// [`loss_and_gradients`], drawing dropout masks in the same order.
pub fn relu_signs(
    params: &ModelParameters,
    ids: &[usize],
    targets: &[StepTarget],
    mut dropout: Option<Dropout<'_>>,
) -> Vec<bool> {
    let mut out = Vec::new();
    if targets.is_empty() {
        return out;
    }
    let Ok(enc) = Encoding::new(params, ids, dropout.as_mut()) else {
        return out;
    };
    let f = &enc.features;
    for t in targets {
        let passes = match t {
            StepTarget::Structural { spans: None, .. } => vec![],
            &StepTarget::Structural {
                spans: Some((a, i, j)),
                ..
            } => vec![
                head(&params.shift, concat(&[&f[i], &f[j]]), dropout.as_mut()),
                head(&params.combine, concat(&[&f[a], &f[i], &f[j]]), dropout.as_mut()),
            ],
            &StepTarget::Label { i, k, j, .. } => {
                vec![head(&params.label, concat(&[&f[i], &f[k], &f[j]]), dropout.as_mut())]
            }
        };
        for p in passes {
            out.extend(p.pre.iter().map(|&v| v > 0.0));
        }
    }
    out
}
