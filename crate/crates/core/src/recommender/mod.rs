//! Neighborhood collaborative filtering over a sparse rating matrix, with
//! similarities from rating vectors or from learned representations.

mod model;
mod predict;
mod similarity;
mod store;


pub use model::Model;
pub use predict::{
    predict_batch, predict_item_based, predict_user_based, similarity, Fallback, NeighborOrder,
    Prediction, Predictor, PredictorSpec, SimilaritySource,
};
pub use similarity::{ConstantSimilarity, EmbeddingCosine, RatingCosine, Similarity, Target};
pub use store::{RatingEvent, RatingsStore};
