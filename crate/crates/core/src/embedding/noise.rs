use rand::Rng;

use crate::error::{Error, Result};

/// Negative-sampling noise distribution: unigram counts raised to a power
/// (0.75 by default), normalized.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub fn new(counts: &[u64], exponent: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyInput("noise table counts"));
        }
        if counts.contains(&0) {
            return Err(Error::Config("noise table counts must be positive".into()));
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(exponent)).collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        Ok(NoiseTable {
            probabilities,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }

    /// Draws `k` indices, redrawing any that equal `target`. Requires at
    /// least two entries.
    pub fn draw_negatives<R: Rng + ?Sized>(&self, target: usize, k: usize, rng: &mut R) -> Vec<usize> {
        let mut out = Vec::with_capacity(k);
        self.draw_negatives_into(target, k, rng, &mut out);
        out
    }

    pub(crate) fn draw_negatives_into<R: Rng + ?Sized>(
        &self,
        target: usize,
        k: usize,
        rng: &mut R,
        out: &mut Vec<usize>,
    ) {
        assert!(self.len() >= 2, "negative sampling needs at least two tokens");
        out.clear();
        while out.len() < k {
            let n = self.sample(rng);
            if n != target {
                out.push(n);
            }
        }
    }
}
