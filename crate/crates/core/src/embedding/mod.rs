//! CBOW and Skip-gram training with negative sampling, hierarchical
//! softmax, or the exact softmax; word2vec-style text serialization.

mod config;
mod huffman;
mod io;
mod loss;
mod math;
mod matrix;
mod model;
mod noise;
mod train;

pub use config::{EmbeddingConfig, LossKind, ModelKind, EXACT_SOFTMAX_MAX_VOCAB};
pub use huffman::{HuffmanTree, PathStep};
pub use io::{load_embeddings, save_embeddings};
pub use loss::{
    hs_loss_and_grads, hs_probability, ns_loss_and_grads, ns_loss_given_negatives,
    softmax_loss_and_grads, LossGrads,
};
pub use math::{log_sigmoid, sigmoid, softmax_distribution};
pub use matrix::{Matrix, RowRead};
pub use model::{cbow_hidden, init_model, EmbeddingModel, HierarchicalOutput};
pub use noise::NoiseTable;
pub use train::{train, train_with_stats, TrainStats};
