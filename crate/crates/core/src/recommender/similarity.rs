use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::store::RatingsStore;
use crate::error::{Error, Result};
use crate::vectorspace::RepresentationStore;

/// Whether neighborhoods are built from users or from items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    UserBased,
    ItemBased,
}

/// A similarity between two users or two items, addressed by their indices
/// in a [`RatingsStore`].
pub trait Similarity: Send + Sync {
    fn similarity(&self, target: Target, a: usize, b: usize) -> Result<f64>;

    /// Whether `entity` can take part in any comparison.
    fn comparable(&self, target: Target, entity: usize) -> bool;
}

/// Cosine over sparse rating vectors: users as vectors over items, items as
/// vectors over users. Missing ratings count as zero.
pub struct RatingCosine<'a> {
    ratings: &'a RatingsStore,
}

impl<'a> RatingCosine<'a> {
    pub fn new(ratings: &'a RatingsStore) -> Self {
        RatingCosine { ratings }
    }

    fn view(&self, target: Target, entity: usize) -> (&[(usize, f64)], f64) {
        match target {
            Target::UserBased => (
                self.ratings.user_ratings(entity),
                self.ratings.user_norm(entity),
            ),
            Target::ItemBased => (
                self.ratings.item_ratings(entity),
                self.ratings.item_norm(entity),
            ),
        }
    }

    fn name(&self, target: Target, entity: usize) -> String {
        match target {
            Target::UserBased => self.ratings.user_token(entity).to_string(),
            Target::ItemBased => self.ratings.item_token(entity).to_string(),
        }
    }
}

/// Dot product of two index-sorted sparse vectors.
pub(crate) fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

impl Similarity for RatingCosine<'_> {
    fn similarity(&self, target: Target, a: usize, b: usize) -> Result<f64> {
        let (va, na) = self.view(target, a);
        let (vb, nb) = self.view(target, b);
        if na == 0.0 {
            return Err(Error::Unqueryable(self.name(target, a)));
        }
        if nb == 0.0 {
            return Err(Error::Unqueryable(self.name(target, b)));
        }
        Ok((sparse_dot(va, vb) / (na * nb)).clamp(-1.0, 1.0))
    }

    fn comparable(&self, target: Target, entity: usize) -> bool {
        self.view(target, entity).1 > 0.0
    }
}

/// Cosine over learned vectors, looked up by the user's or movie's token.
pub struct EmbeddingCosine<'a> {
    store: Arc<RepresentationStore>,
    ratings: &'a RatingsStore,
    users: Vec<Option<usize>>,
    items: Vec<Option<usize>>,
}

impl<'a> EmbeddingCosine<'a> {
    pub fn new(store: Arc<RepresentationStore>, ratings: &'a RatingsStore) -> Self {
        let lookup = |token| store.position(token).filter(|&p| store.norm(p) > 0.0);
        let users = (0..ratings.num_users())
            .map(|u| lookup(ratings.user_token(u)))
            .collect();
        let items = (0..ratings.num_items())
            .map(|i| lookup(ratings.item_token(i)))
            .collect();
        EmbeddingCosine {
            store,
            ratings,
            users,
            items,
        }
    }

    fn position(&self, target: Target, entity: usize) -> Result<usize> {
        let (slot, token) = match target {
            Target::UserBased => (self.users[entity], self.ratings.user_token(entity)),
            Target::ItemBased => (self.items[entity], self.ratings.item_token(entity)),
        };
        slot.ok_or_else(|| Error::Unqueryable(token.to_string()))
    }
}

impl Similarity for EmbeddingCosine<'_> {
    fn similarity(&self, target: Target, a: usize, b: usize) -> Result<f64> {
        let pa = self.position(target, a)?;
        let pb = self.position(target, b)?;
        self.store.similarity(pa, pb)
    }

    fn comparable(&self, target: Target, entity: usize) -> bool {
        self.position(target, entity).is_ok()
    }
}

/// Every pair gets the same similarity.
pub struct ConstantSimilarity(pub f64);

impl Similarity for ConstantSimilarity {
    fn similarity(&self, _: Target, _: usize, _: usize) -> Result<f64> {
        Ok(self.0)
    }

    fn comparable(&self, _: Target, _: usize) -> bool {
        true
    }
}
