use std::sync::atomic::{AtomicUsize, Ordering};

use log::{debug, info};

use super::config::{EmbeddingConfig, LossKind, ModelKind};
use super::huffman::HuffmanTree;
use super::loss::{hs_into, mean_rows_into, ns_into, softmax_into, LossGrads};
use super::matrix::{AtomicMatrix, RowRead};
use super::model::{init_model, EmbeddingModel};
use super::noise::NoiseTable;
use crate::corpus::{Sentence, Vocabulary};
use crate::error::{Error, Result};
use crate::seed::{stage_rng, Rng};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainStats {
    /// Mean per-example loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Prediction examples per epoch (positions for CBOW, pairs for
    /// Skip-gram).
    pub examples_per_epoch: usize,
}

/// Trains CBOW or Skip-gram vectors over `sentences`. See [`train_with_stats`].
pub fn train(
    sentences: &[Sentence],
    vocabulary: &Vocabulary,
    config: &EmbeddingConfig,
) -> Result<EmbeddingModel> {
    train_with_stats(sentences, vocabulary, config).map(|(model, _)| model)
}

/// Every position of every sentence is a target once per epoch; its context
/// is the tokens within `window` positions, truncated at the sentence ends.
/// Out-of-vocabulary tokens are dropped before windows are taken. The
/// learning rate decays linearly from `lr_initial` to `lr_final` over all
/// scheduled positions.
///
/// With more than one worker, sentences are split into contiguous shards and
/// workers update the shared matrices without locking; results then depend
/// on thread scheduling. A single worker is bit-for-bit reproducible.
pub fn train_with_stats(
    sentences: &[Sentence],
    vocabulary: &Vocabulary,
    config: &EmbeddingConfig,
) -> Result<(EmbeddingModel, TrainStats)> {
    config.validate()?;
    let encoded: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| vocabulary.encode(s))
        .filter(|s| s.len() >= 2)
        .collect();
    if encoded.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut model = init_model(vocabulary.clone(), config.clone())?;
    let positions: usize = encoded.iter().map(Vec::len).sum();
    let examples_per_epoch = match config.model {
        ModelKind::Cbow => positions,
        ModelKind::SkipGram => encoded.iter().map(|s| pair_count(s.len(), config.window)).sum(),
    };
    let mut stats = TrainStats {
        epoch_losses: Vec::with_capacity(config.epochs),
        examples_per_epoch,
    };
    if config.epochs == 0 {
        return Ok((model, stats));
    }

    let noise = match config.loss {
        LossKind::NegativeSampling => Some(NoiseTable::new(vocabulary.counts(), config.noise_exponent)?),
        _ => None,
    };
    let input = AtomicMatrix::from_matrix(&model.input_vectors);
    let output_side = match &model.hierarchical {
        Some(hs) => AtomicMatrix::from_matrix(&hs.nodes),
        None => AtomicMatrix::from_matrix(&model.output_vectors),
    };
    let shared = Shared {
        config,
        input: &input,
        output: &output_side,
        noise: noise.as_ref(),
        tree: model.hierarchical.as_ref().map(|h| &h.tree),
        progress: AtomicUsize::new(0),
        total: positions * config.epochs,
    };

    let workers = config.workers.min(encoded.len());
    let shard_len = encoded.len().div_ceil(workers);
    let shards: Vec<&[Vec<usize>]> = encoded.chunks(shard_len).collect();
    info!(
        "training {} ({}) on {} sentences, V={}, R={}, {} epochs, {} worker(s)",
        config.model,
        config.loss,
        encoded.len(),
        vocabulary.len(),
        config.dim,
        config.epochs,
        shards.len()
    );

    for epoch in 0..config.epochs {
        let (loss, examples) = if shards.len() == 1 {
            let mut rng = stage_rng(config.seed, &format!("train/0/{epoch}"));
            shared.run(shards[0], &mut rng)
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(w, shard)| {
                        let shared = &shared;
                        scope.spawn(move || {
                            let mut rng = stage_rng(config.seed, &format!("train/{w}/{epoch}"));
                            shared.run(shard, &mut rng)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .fold((0.0, 0), |acc, (l, n)| (acc.0 + l, acc.1 + n))
            })
        };
        let mean = if examples > 0 { loss / examples as f64 } else { 0.0 };
        debug!("epoch {}: mean loss {mean:.6}", epoch + 1);
        stats.epoch_losses.push(mean);
    }

    model.input_vectors = input.into_matrix();
    match &mut model.hierarchical {
        Some(hs) => hs.nodes = output_side.into_matrix(),
        None => model.output_vectors = output_side.into_matrix(),
    }
    Ok((model, stats))
}

fn pair_count(len: usize, window: usize) -> usize {
    (0..len)
        .map(|k| k.min(window) + (len - 1 - k).min(window))
        .sum()
}

struct Shared<'a> {
    config: &'a EmbeddingConfig,
    input: &'a AtomicMatrix,
    output: &'a AtomicMatrix,
    noise: Option<&'a NoiseTable>,
    tree: Option<&'a HuffmanTree>,
    progress: AtomicUsize,
    total: usize,
}

struct Scratch {
    hidden: Vec<f64>,
    context: Vec<usize>,
    negatives: Vec<usize>,
    grads: LossGrads,
}

impl Shared<'_> {
    fn learning_rate(&self) -> f64 {
        let done = self.progress.load(Ordering::Relaxed) as f64;
        let frac = (done / self.total as f64).min(1.0);
        let lr = self.config.lr_initial - (self.config.lr_initial - self.config.lr_final) * frac;
        lr.max(self.config.lr_final)
    }

    /// One pass over a shard; returns (summed loss, examples).
    fn run(&self, shard: &[Vec<usize>], rng: &mut Rng) -> (f64, usize) {
        let mut scratch = Scratch {
            hidden: vec![0.0; self.config.dim],
            context: Vec::with_capacity(2 * self.config.window),
            negatives: Vec::with_capacity(self.config.negatives),
            grads: LossGrads::default(),
        };
        let mut loss = 0.0;
        let mut examples = 0;
        let window = self.config.window;
        for sentence in shard {
            for k in 0..sentence.len() {
                let lr = self.learning_rate();
                let lo = k.saturating_sub(window);
                let hi = (k + window).min(sentence.len() - 1);
                scratch.context.clear();
                scratch
                    .context
                    .extend((lo..=hi).filter(|&j| j != k).map(|j| sentence[j]));
                match self.config.model {
                    ModelKind::Cbow => {
                        mean_rows_into(self.input, &scratch.context, &mut scratch.hidden);
                        loss += self.output_step(sentence[k], lr, rng, &mut scratch);
                        let scale = -lr / scratch.context.len() as f64;
                        for &c in &scratch.context {
                            self.input.add_scaled_row(c, scale, &scratch.grads.grad_hidden);
                        }
                        examples += 1;
                    }
                    ModelKind::SkipGram => {
                        let center = sentence[k];
                        for ci in 0..scratch.context.len() {
                            let target = scratch.context[ci];
                            self.input.read_row(center, &mut scratch.hidden);
                            loss += self.output_step(target, lr, rng, &mut scratch);
                            self.input.add_scaled_row(center, -lr, &scratch.grads.grad_hidden);
                            examples += 1;
                        }
                    }
                }
                self.progress.fetch_add(1, Ordering::Relaxed);
            }
        }
        (loss, examples)
    }

    /// Computes the loss for predicting `target` from `scratch.hidden`,
    /// applies the output-side update, and leaves `d loss / d hidden` in
    /// `scratch.grads`.
    fn output_step(&self, target: usize, lr: f64, rng: &mut Rng, scratch: &mut Scratch) -> f64 {
        let Scratch {
            hidden,
            negatives,
            grads,
            ..
        } = scratch;
        match self.config.loss {
            LossKind::NegativeSampling => {
                let noise = self.noise.expect("noise table for negative sampling");
                noise.draw_negatives_into(target, self.config.negatives, rng, negatives);
                ns_into(hidden, target, negatives, self.output, grads);
            }
            LossKind::HierarchicalSoftmax => {
                let tree = self.tree.expect("Huffman tree for hierarchical softmax");
                hs_into(hidden, target, tree, self.output, grads);
            }
            LossKind::ExactSoftmax => softmax_into(hidden, target, self.output, grads),
        }
        for &(row, coeff) in &grads.row_coeffs {
            self.output.add_scaled_row(row, -lr * coeff, hidden);
        }
        debug_assert_eq!(self.output.dim(), hidden.len());
        grads.loss
    }
}
