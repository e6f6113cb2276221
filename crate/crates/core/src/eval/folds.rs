use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::recommender::RatingsStore;
use crate::seed::stage_rng;

pub const NUM_FOLDS: u8 = 5;
/// The partition held out for tuning and discarded afterwards.
pub const TUNING_FOLD: u8 = 5;

/// Fold index in `1..=5` for every event of a [`RatingsStore`], by event id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub folds: Vec<u8>,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn fold(&self, event: usize) -> u8 {
        self.folds[event]
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// Event ids in `fold`, ascending.
    pub fn events_in(&self, fold: u8) -> Vec<usize> {
        self.select(|f| f == fold)
    }

    pub fn select(&self, keep: impl Fn(u8) -> bool) -> Vec<usize> {
        (0..self.folds.len()).filter(|&e| keep(self.folds[e])).collect()
    }

    /// Per user, the number of events in each fold.
    pub fn user_fold_sizes(&self, store: &RatingsStore) -> Vec<[usize; NUM_FOLDS as usize]> {
        let mut sizes = vec![[0; NUM_FOLDS as usize]; store.num_users()];
        for (event, e) in store.events().iter().enumerate() {
            sizes[e.user][(self.folds[event] - 1) as usize] += 1;
        }
        sizes
    }
}

/// Shuffles each user's events and deals them round-robin into the five
/// folds, starting at a random fold per user so remainders spread evenly.
/// Users are visited in index order from a single seeded stream.
pub fn partition(store: &RatingsStore, seed: u64) -> FoldAssignment {
    let mut rng = stage_rng(seed, "partition");
    let mut by_user: Vec<Vec<usize>> = vec![Vec::new(); store.num_users()];
    for (event, e) in store.events().iter().enumerate() {
        by_user[e.user].push(event);
    }
    let mut folds = vec![0u8; store.events().len()];
    for events in &mut by_user {
        events.shuffle(&mut rng);
        let offset = rng.gen_range(0..NUM_FOLDS as usize);
        for (i, &event) in events.iter().enumerate() {
            folds[event] = ((offset + i) % NUM_FOLDS as usize) as u8 + 1;
        }
    }
    FoldAssignment { folds, seed }
}
