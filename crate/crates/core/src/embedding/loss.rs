//! Per-example losses and their exact gradients.
//!
//! Every loss here is a function of a hidden vector `h` and a handful of
//! output-side rows `o_j`, through the scores `h·o_j`. The gradient with
//! respect to each touched row is therefore `coeff_j · h`, so rows are
//! reported as `(index, coeff)` pairs rather than full vectors.

use rand::Rng;

use super::huffman::HuffmanTree;
use super::math::{log_sigmoid, sigmoid, softmax_distribution};
use super::matrix::RowRead;
use super::noise::NoiseTable;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossGrads {
    pub loss: f64,
    /// d loss / d h
    pub grad_hidden: Vec<f64>,
    /// d loss / d row = coeff · h. A row may appear more than once (a
    /// negative drawn twice); its gradient is the sum.
    pub row_coeffs: Vec<(usize, f64)>,
}

impl LossGrads {
    fn reset(&mut self, dim: usize) {
        self.loss = 0.0;
        self.grad_hidden.clear();
        self.grad_hidden.resize(dim, 0.0);
        self.row_coeffs.clear();
    }

    /// Expands the row coefficients into explicit gradient vectors.
    pub fn row_gradients(&self, hidden: &[f64]) -> Vec<(usize, Vec<f64>)> {
        self.row_coeffs
            .iter()
            .map(|&(row, coeff)| (row, hidden.iter().map(|h| coeff * h).collect()))
            .collect()
    }

    /// Adds the binary logistic term for `row` with the given label.
    #[inline]
    fn logistic_term<M: RowRead>(&mut self, hidden: &[f64], row: usize, positive: bool, rows: &M) {
        let score = rows.dot_row(row, hidden);
        let (loss, coeff) = if positive {
            (-log_sigmoid(score), sigmoid(score) - 1.0)
        } else {
            (-log_sigmoid(-score), sigmoid(score))
        };
        self.loss += loss;
        rows.accumulate_row(row, coeff, &mut self.grad_hidden);
        self.row_coeffs.push((row, coeff));
    }
}

/// Negative-sampling loss
/// `-ln σ(h·o_t) - Σ_k ln σ(-h·o_{n_k})` with `K` negatives drawn from
/// `noise`, never equal to `target`.
pub fn ns_loss_and_grads<M: RowRead, R: Rng + ?Sized>(
    hidden: &[f64],
    target: usize,
    noise: &NoiseTable,
    negatives: usize,
    rng: &mut R,
    output: &M,
) -> LossGrads {
    let drawn = noise.draw_negatives(target, negatives, rng);
    ns_loss_given_negatives(hidden, target, &drawn, output)
}

/// Negative-sampling loss with the negatives already chosen.
pub fn ns_loss_given_negatives<M: RowRead>(
    hidden: &[f64],
    target: usize,
    negatives: &[usize],
    output: &M,
) -> LossGrads {
    let mut out = LossGrads::default();
    ns_into(hidden, target, negatives, output, &mut out);
    out
}

pub(crate) fn ns_into<M: RowRead>(
    hidden: &[f64],
    target: usize,
    negatives: &[usize],
    output: &M,
    out: &mut LossGrads,
) {
    out.reset(hidden.len());
    out.logistic_term(hidden, target, true, output);
    for &n in negatives {
        out.logistic_term(hidden, n, false, output);
    }
}

/// Hierarchical-softmax loss `-Σ ln σ(±h·n_j)` along the target's Huffman
/// path; branch 0 takes the positive sign.
pub fn hs_loss_and_grads<M: RowRead>(
    hidden: &[f64],
    target: usize,
    tree: &HuffmanTree,
    nodes: &M,
) -> LossGrads {
    let mut out = LossGrads::default();
    hs_into(hidden, target, tree, nodes, &mut out);
    out
}

pub(crate) fn hs_into<M: RowRead>(
    hidden: &[f64],
    target: usize,
    tree: &HuffmanTree,
    nodes: &M,
    out: &mut LossGrads,
) {
    out.reset(hidden.len());
    for step in tree.path(target) {
        out.logistic_term(hidden, step.node, !step.bit, nodes);
    }
}

/// Probability the hierarchical softmax assigns to `leaf`.
pub fn hs_probability<M: RowRead>(hidden: &[f64], leaf: usize, tree: &HuffmanTree, nodes: &M) -> f64 {
    tree.path(leaf)
        .iter()
        .map(|step| {
            let score = nodes.dot_row(step.node, hidden);
            sigmoid(if step.bit { -score } else { score })
        })
        .product()
}

/// Full softmax cross-entropy `-ln softmax(O h)_target` over every output row.
pub fn softmax_loss_and_grads<M: RowRead>(hidden: &[f64], target: usize, output: &M) -> LossGrads {
    let mut out = LossGrads::default();
    softmax_into(hidden, target, output, &mut out);
    out
}

pub(crate) fn softmax_into<M: RowRead>(hidden: &[f64], target: usize, output: &M, out: &mut LossGrads) {
    out.reset(hidden.len());
    let scores: Vec<f64> = (0..output.num_rows())
        .map(|row| output.dot_row(row, hidden))
        .collect();
    let probs = softmax_distribution(&scores);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    out.loss = log_norm - scores[target];
    for (row, p) in probs.into_iter().enumerate() {
        let coeff = if row == target { p - 1.0 } else { p };
        output.accumulate_row(row, coeff, &mut out.grad_hidden);
        out.row_coeffs.push((row, coeff));
    }
}

/// Mean of the given rows, written into `out`.
pub(crate) fn mean_rows_into<M: RowRead>(rows: &M, indices: &[usize], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let scale = 1.0 / indices.len() as f64;
    for &i in indices {
        rows.accumulate_row(i, scale, out);
    }
}
