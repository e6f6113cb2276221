use std::cmp::Ordering;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::similarity::{EmbeddingCosine, RatingCosine, Similarity, Target};
use super::store::RatingsStore;
use crate::corpus::EntityToken;
use crate::error::{Error, Result};
use crate::vectorspace::RepresentationStore;

#[derive(Debug, Clone)]
pub enum SimilaritySource {
    RatingVectors,
    Embeddings(Arc<RepresentationStore>),
}

/// When neighbors are restricted to those who rated the query item (or
/// items the query user rated).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NeighborOrder {
    /// Restrict to eligible neighbors, then take the k most similar.
    #[default]
    FilterFirst,
    /// Take the k most similar overall, then drop ineligible ones.
    TopKFirst,
}

#[derive(Debug, Clone)]
pub struct PredictorSpec {
    pub target: Target,
    pub source: SimilaritySource,
    pub k: usize,
    pub order: NeighborOrder,
}

impl PredictorSpec {
    pub fn new(target: Target, source: SimilaritySource, k: usize) -> Self {
        PredictorSpec {
            target,
            source,
            k,
            order: NeighborOrder::default(),
        }
    }
}

/// Which default filled in for an empty neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fallback {
    None,
    GlobalMean,
    UserMean,
    ItemMean,
}

impl Fallback {
    pub fn name(self) -> &'static str {
        match self {
            Fallback::None => "none",
            Fallback::GlobalMean => "global_mean",
            Fallback::UserMean => "user_mean",
            Fallback::ItemMean => "item_mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub neighborhood_used: usize,
    pub fallback: Fallback,
}

/// Neighborhood predictor: the similarity-weighted mean of the k most
/// similar neighbors' ratings, with positive similarity only.
///
/// User-based: neighbors are other users and the ratings are theirs on the
/// query item. Item-based: neighbors are other items and the ratings are
/// the query user's on them. Ties in similarity go to the smaller canonical
/// token. An empty neighborhood falls back to the item mean, then the user
/// mean, then the global mean.
pub struct Predictor<'a> {
    ratings: &'a RatingsStore,
    target: Target,
    k: usize,
    order: NeighborOrder,
    similarity: Box<dyn Similarity + 'a>,
}

impl<'a> Predictor<'a> {
    pub fn new(spec: &PredictorSpec, ratings: &'a RatingsStore) -> Self {
        let similarity: Box<dyn Similarity + 'a> = match &spec.source {
            SimilaritySource::RatingVectors => Box::new(RatingCosine::new(ratings)),
            SimilaritySource::Embeddings(store) => Box::new(EmbeddingCosine::new(store.clone(), ratings)),
        };
        Self::with_similarity(spec.target, spec.k, spec.order, ratings, similarity)
    }

    pub fn with_similarity(
        target: Target,
        k: usize,
        order: NeighborOrder,
        ratings: &'a RatingsStore,
        similarity: Box<dyn Similarity + 'a>,
    ) -> Self {
        Predictor {
            ratings,
            target,
            k,
            order,
            similarity,
        }
    }

    pub fn ratings(&self) -> &RatingsStore {
        self.ratings
    }

    pub fn predict(&self, user: usize, item: usize) -> Result<Prediction> {
        Ok(self.predict_for_ks(user, item, &[self.k])?[0])
    }

    /// One prediction per neighborhood size, sharing the neighbor ranking.
    pub fn predict_for_ks(&self, user: usize, item: usize, ks: &[usize]) -> Result<Vec<Prediction>> {
        self.check(user, item)?;
        let ranked = self.rank(user, item);
        Ok(ks
            .iter()
            .map(|&k| self.from_ranking(user, item, &ranked, k))
            .collect())
    }

    fn check(&self, user: usize, item: usize) -> Result<()> {
        if user >= self.ratings.num_users() {
            return Err(Error::UnknownToken(format!("user index {user}")));
        }
        if item >= self.ratings.num_items() {
            return Err(Error::UnknownToken(format!("item index {item}")));
        }
        Ok(())
    }

    fn key(&self, entity: usize) -> &str {
        match self.target {
            Target::UserBased => self.ratings.user_key(entity),
            Target::ItemBased => self.ratings.item_key(entity),
        }
    }

    /// Ranked `(neighbor, similarity, rating)`; `rating` is `None` for
    /// neighbors that cannot contribute (only with [`NeighborOrder::TopKFirst`]).
    fn rank(&self, user: usize, item: usize) -> Vec<(usize, f64, Option<f64>)> {
        let query = match self.target {
            Target::UserBased => user,
            Target::ItemBased => item,
        };
        if !self.similarity.comparable(self.target, query) {
            return Vec::new();
        }
        let score = |n: usize| self.similarity.similarity(self.target, query, n).ok();
        let mut ranked: Vec<(usize, f64, Option<f64>)> = match self.order {
            NeighborOrder::FilterFirst => {
                let eligible = match self.target {
                    Target::UserBased => self.ratings.item_ratings(item),
                    Target::ItemBased => self.ratings.user_ratings(user),
                };
                eligible
                    .iter()
                    .filter(|&&(n, _)| n != query)
                    .filter_map(|&(n, r)| score(n).filter(|&s| s > 0.0).map(|s| (n, s, Some(r))))
                    .collect()
            }
            NeighborOrder::TopKFirst => {
                let count = match self.target {
                    Target::UserBased => self.ratings.num_users(),
                    Target::ItemBased => self.ratings.num_items(),
                };
                (0..count)
                    .filter(|&n| n != query)
                    .filter_map(|n| {
                        let rating = match self.target {
                            Target::UserBased => self.ratings.rating(n, item),
                            Target::ItemBased => self.ratings.rating(user, n),
                        };
                        score(n).map(|s| (n, s, rating))
                    })
                    .collect()
            }
        };
        ranked.sort_by(|a, b| match b.1.total_cmp(&a.1) {
            Ordering::Equal => self.key(a.0).cmp(self.key(b.0)),
            other => other,
        });
        ranked
    }

    fn from_ranking(
        &self,
        user: usize,
        item: usize,
        ranked: &[(usize, f64, Option<f64>)],
        k: usize,
    ) -> Prediction {
        let (mut weight, mut total, mut used) = (0.0, 0.0, 0);
        for &(_, sim, rating) in ranked.iter().take(k) {
            if let Some(r) = rating {
                if sim > 0.0 {
                    weight += sim;
                    total += sim * r;
                    used += 1;
                }
            }
        }
        if used == 0 {
            return self.fallback(user, item);
        }
        Prediction {
            value: self.ratings.scale().clamp(total / weight),
            neighborhood_used: used,
            fallback: Fallback::None,
        }
    }

    /// Item mean, then user mean, then global mean (or the scale midpoint
    /// for an empty store). Out-of-range indices skip their mean.
    pub fn fallback(&self, user: usize, item: usize) -> Prediction {
        let ratings = self.ratings;
        let (value, fallback) = if let Some(m) = (item < ratings.num_items()).then(|| ratings.item_mean(item)).flatten() {
            (m, Fallback::ItemMean)
        } else if let Some(m) = (user < ratings.num_users()).then(|| ratings.user_mean(user)).flatten() {
            (m, Fallback::UserMean)
        } else {
            let scale = ratings.scale();
            (
                ratings.global_mean().unwrap_or((scale.min + scale.max) / 2.0),
                Fallback::GlobalMean,
            )
        };
        Prediction {
            value: ratings.scale().clamp(value),
            neighborhood_used: 0,
            fallback,
        }
    }

    /// Element-wise [`Predictor::predict`]; failures become fallback
    /// predictions and are logged. Output order matches input order.
    pub fn predict_batch(&self, pairs: &[(usize, usize)]) -> Vec<Prediction> {
        pairs
            .par_iter()
            .map(|&(u, i)| {
                self.predict(u, i).unwrap_or_else(|err| {
                    warn!("prediction for ({u}, {i}) fell back: {err}");
                    self.fallback(u, i)
                })
            })
            .collect()
    }

    /// Like [`Predictor::predict_batch`] with tokens. Unknown users or items
    /// fall back using whichever means are known.
    pub fn predict_batch_tokens(&self, pairs: &[(EntityToken, EntityToken)]) -> Vec<Prediction> {
        let indices: Vec<(usize, usize)> = pairs
            .iter()
            .map(|(u, i)| {
                (
                    self.ratings.user_id(u).unwrap_or(usize::MAX),
                    self.ratings.item_id(i).unwrap_or(usize::MAX),
                )
            })
            .collect();
        self.predict_batch(&indices)
    }
}

fn require_target(spec: &PredictorSpec, target: Target) -> Result<()> {
    if spec.target != target {
        return Err(Error::Config(format!(
            "predictor spec targets {:?}, expected {target:?}",
            spec.target
        )));
    }
    Ok(())
}

/// Similarity between two users (user-based spec) or two movies
/// (item-based spec) under the spec's similarity source.
pub fn similarity(a: &EntityToken, b: &EntityToken, spec: &PredictorSpec, ratings: &RatingsStore) -> Result<f64> {
    let resolve = |t: &EntityToken| {
        match spec.target {
            Target::UserBased => ratings.user_id(t),
            Target::ItemBased => ratings.item_id(t),
        }
        .ok_or_else(|| Error::UnknownToken(t.to_string()))
    };
    let (ia, ib) = (resolve(a)?, resolve(b)?);
    Predictor::new(spec, ratings)
        .similarity
        .similarity(spec.target, ia, ib)
}

pub fn predict_user_based(user: usize, item: usize, spec: &PredictorSpec, ratings: &RatingsStore) -> Result<Prediction> {
    require_target(spec, Target::UserBased)?;
    Predictor::new(spec, ratings).predict(user, item)
}

pub fn predict_item_based(user: usize, item: usize, spec: &PredictorSpec, ratings: &RatingsStore) -> Result<Prediction> {
    require_target(spec, Target::ItemBased)?;
    Predictor::new(spec, ratings).predict(user, item)
}

pub fn predict_batch(pairs: &[(usize, usize)], spec: &PredictorSpec, ratings: &RatingsStore) -> Vec<Prediction> {
    Predictor::new(spec, ratings).predict_batch(pairs)
}
