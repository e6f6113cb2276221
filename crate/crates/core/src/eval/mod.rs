//! Five-partition evaluation: every user's ratings are split evenly into
//! five folds; the fifth tunes hyperparameters and is then discarded, and
//! the other four are cross-validated under RMSE.

mod folds;
mod metrics;
mod protocol;
mod report;


pub use folds::{partition, FoldAssignment, NUM_FOLDS, TUNING_FOLD};
pub use metrics::{rmse, sum_squared_error};
pub use protocol::{
    cross_validate, evaluate, fold_pairs, score_folds, tune, Dataset, EmbeddingPoint, EvalConfig, EvalReport,
    FoldScore, GridScore, HybridChoice, HybridSeries, KScore, ModelChoice, ModelSeries, RoundTrace, Tuning,
    WeightEntry, DEFAULT_KS,
};
pub use report::format_table;
