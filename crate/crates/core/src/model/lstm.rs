//! One direction of an LSTM layer with backpropagation through time.
//!
//! Gate rows are laid out `[input, forget, cell, output]`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::tensor::Matrix;
use crate::math::{sigmoid, tanh};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LstmParams {
    /// `4h × input`
    pub w: Matrix,
    /// `4h × h`
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl LstmParams {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let mut b = vec![0.0; 4 * hidden];
        b[hidden..2 * hidden].fill(1.0);
        LstmParams {
            w: Matrix::glorot(4 * hidden, input, rng),
            u: Matrix::glorot(4 * hidden, hidden, rng),
            b,
        }
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams {
            w: Matrix::zeros(self.w.rows, self.w.cols),
            u: Matrix::zeros(self.u.rows, self.u.cols),
            b: vec![0.0; self.b.len()],
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols
    }

    pub fn input(&self) -> usize {
        self.w.cols
    }
}

/// Activations of one pass, indexed by sequence position.
#[derive(Clone, Debug)]
pub struct LstmTrace {
    pub reverse: bool,
    /// Post-nonlinearity gate values, `4h` per position.
    pub gates: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

fn order(len: usize, reverse: bool) -> impl Iterator<Item = usize> {
    (0..len).map(move |t| if reverse { len - 1 - t } else { t })
}

pub fn forward(p: &LstmParams, xs: &[Vec<f64>], reverse: bool) -> LstmTrace {
    let hd = p.hidden();
    let len = xs.len();
    let mut gates = vec![Vec::new(); len];
    let mut cs = vec![Vec::new(); len];
    let mut hs = vec![Vec::new(); len];
    let zero = vec![0.0; hd];
    let mut prev: Option<usize> = None;
    for t in order(len, reverse) {
        let (h_prev, c_prev) = match prev {
            Some(q) => (&hs[q], &cs[q]),
            None => (&zero, &zero),
        };
        let mut z = p.b.clone();
        p.w.matvec_add(&xs[t], &mut z);
        p.u.matvec_add(h_prev, &mut z);
        for (r, v) in z.iter_mut().enumerate() {
            *v = if (2 * hd..3 * hd).contains(&r) {
                tanh(*v)
            } else {
                sigmoid(*v)
            };
        }
        let mut c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        for u in 0..hd {
            let (i, f, g, o) = (z[u], z[hd + u], z[2 * hd + u], z[3 * hd + u]);
            c[u] = f * c_prev[u] + i * g;
            h[u] = o * tanh(c[u]);
        }
        gates[t] = z;
        cs[t] = c;
        hs[t] = h;
        prev = Some(t);
    }
    LstmTrace {
        reverse,
        gates,
        c: cs,
        h: hs,
    }
}

/// Accumulates parameter gradients into `grad` and input gradients into
/// `dxs`, given `dh[t]`, the loss gradient with respect to `h[t]`.
pub fn backward(
    p: &LstmParams,
    xs: &[Vec<f64>],
    trace: &LstmTrace,
    dh: &[Vec<f64>],
    grad: &mut LstmParams,
    dxs: &mut [Vec<f64>],
) {
    let hd = p.hidden();
    let len = xs.len();
    let zero = vec![0.0; hd];
    let mut dh_next = vec![0.0; hd];
    let mut dc_next = vec![0.0; hd];
    let mut dz = vec![0.0; 4 * hd];
    let steps: Vec<usize> = order(len, trace.reverse).collect();
    for (pos, &t) in steps.iter().enumerate().rev() {
        let prev = pos.checked_sub(1).map(|q| steps[q]);
        let (h_prev, c_prev) = match prev {
            Some(q) => (&trace.h[q], &trace.c[q]),
            None => (&zero, &zero),
        };
        let z = &trace.gates[t];
        for u in 0..hd {
            let (i, f, g, o) = (z[u], z[hd + u], z[2 * hd + u], z[3 * hd + u]);
            let dh_u = dh[t][u] + dh_next[u];
            let tc = tanh(trace.c[t][u]);
            let dc = dc_next[u] + dh_u * o * (1.0 - tc * tc);
            dz[u] = dc * g * i * (1.0 - i);
            dz[hd + u] = dc * c_prev[u] * f * (1.0 - f);
            dz[2 * hd + u] = dc * i * (1.0 - g * g);
            dz[3 * hd + u] = dh_u * tc * o * (1.0 - o);
            dc_next[u] = dc * f;
        }
        grad.w.outer_add(&dz, &xs[t]);
        grad.u.outer_add(&dz, h_prev);
        for (gb, d) in grad.b.iter_mut().zip(&dz) {
            *gb += d;
        }
        p.w.matvec_t_add(&dz, &mut dxs[t]);
        dh_next.fill(0.0);
        p.u.matvec_t_add(&dz, &mut dh_next);
    }
}
