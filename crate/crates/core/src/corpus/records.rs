use serde::{Deserialize, Serialize};

use super::token::EntityToken;

/// Inclusive bounds of the rating scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    /// MovieLens 10M uses half stars from 0.5 to 5.0.
    pub const MOVIELENS: RatingScale = RatingScale { min: 0.5, max: 5.0 };

    pub fn new(min: f64, max: f64) -> Self {
        assert!(min <= max, "rating scale min {min} exceeds max {max}");
        RatingScale { min, max }
    }

    pub fn contains(&self, rating: f64) -> bool {
        rating >= self.min && rating <= self.max
    }

    pub fn clamp(&self, rating: f64) -> f64 {
        rating.clamp(self.min, self.max)
    }
}

impl Default for RatingScale {
    fn default() -> Self {
        RatingScale::MOVIELENS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingRecord {
    pub user: EntityToken,
    pub movie: EntityToken,
    pub rating: f64,
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagRecord {
    pub user: EntityToken,
    pub movie: EntityToken,
    pub tag: EntityToken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemMetadata {
    pub movie: EntityToken,
    pub director: Option<EntityToken>,
    /// Billing order, no duplicates.
    pub actors: Vec<EntityToken>,
}
