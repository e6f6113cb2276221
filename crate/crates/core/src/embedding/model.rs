use rand::Rng;

use super::config::{EmbeddingConfig, LossKind, EXACT_SOFTMAX_MAX_VOCAB};
use super::huffman::HuffmanTree;
use super::loss::mean_rows_into;
use super::matrix::Matrix;
use crate::corpus::{EntityToken, Vocabulary};
use crate::error::{Error, Result};
use crate::seed::stage_rng;

/// Huffman tree plus one parameter vector per internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalOutput {
    pub tree: HuffmanTree,
    pub nodes: Matrix,
}

/// Input (projection) and output weights of a trained or freshly
/// initialized model, both `V × R`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocabulary: Vocabulary,
    pub input_vectors: Matrix,
    pub output_vectors: Matrix,
    /// Present only for hierarchical softmax.
    pub hierarchical: Option<HierarchicalOutput>,
    pub config: EmbeddingConfig,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.input_vectors.cols()
    }

    pub fn vector(&self, token: &EntityToken) -> Option<&[f64]> {
        self.vocabulary
            .index(token)
            .map(|i| self.input_vectors.row(i))
    }

    pub fn is_finite(&self) -> bool {
        let hs_ok = self
            .hierarchical
            .as_ref()
            .is_none_or(|h| h.nodes.as_slice().iter().all(|x| x.is_finite()));
        hs_ok
            && self.input_vectors.as_slice().iter().all(|x| x.is_finite())
            && self.output_vectors.as_slice().iter().all(|x| x.is_finite())
    }
}

/// Input vectors uniform in `[-0.5/R, 0.5/R]` under the config seed; output
/// vectors and Huffman node vectors zero.
pub fn init_model(vocabulary: Vocabulary, config: EmbeddingConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    let vocab_size = vocabulary.len();
    if vocab_size < 2 {
        return Err(Error::Config(format!(
            "training needs at least 2 tokens, vocabulary has {vocab_size}"
        )));
    }
    if config.loss == LossKind::ExactSoftmax && vocab_size > EXACT_SOFTMAX_MAX_VOCAB {
        return Err(Error::Config(format!(
            "exact softmax is limited to {EXACT_SOFTMAX_MAX_VOCAB} tokens, vocabulary has {vocab_size}"
        )));
    }
    let dim = config.dim;
    let mut rng = stage_rng(config.seed, "embedding-init");
    let bound = 0.5 / dim as f64;
    let data = (0..vocab_size * dim)
        .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * bound)
        .collect();
    let hierarchical = (config.loss == LossKind::HierarchicalSoftmax).then(|| {
        let tree = HuffmanTree::new(vocabulary.counts());
        let nodes = Matrix::zeros(tree.internal_nodes(), dim);
        HierarchicalOutput { tree, nodes }
    });
    Ok(EmbeddingModel {
        input_vectors: Matrix::from_vec(vocab_size, dim, data),
        output_vectors: Matrix::zeros(vocab_size, dim),
        hierarchical,
        vocabulary,
        config,
    })
}

/// Mean of the context tokens' input vectors.
pub fn cbow_hidden(context: &[usize], model: &EmbeddingModel) -> Result<Vec<f64>> {
    if context.is_empty() {
        return Err(Error::EmptyContext);
    }
    let vocab_size = model.vocabulary.len();
    if let Some(&bad) = context.iter().find(|&&i| i >= vocab_size) {
        return Err(Error::Config(format!(
            "context index {bad} outside vocabulary of size {vocab_size}"
        )));
    }
    let mut out = vec![0.0; model.dim()];
    mean_rows_into(&model.input_vectors, context, &mut out);
    Ok(out)
}
