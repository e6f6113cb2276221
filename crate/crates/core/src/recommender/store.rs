use std::collections::HashMap;

use crate::corpus::{EntityToken, RatingRecord, RatingScale};
use crate::error::{Error, Result};

/// One stored rating. Event ids are positions in [`RatingsStore::events`].
#[derive(Debug, Clone, PartialEq)]
pub struct RatingEvent {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
    pub timestamp: Option<i64>,
}

/// Sparse user × item rating matrix with row (user) and column (item)
/// views.
///
/// User and item indices follow first appearance in the source records and
/// are shared by every [`RatingsStore::subset`], so a subset can be queried
/// with the parent's indices.
#[derive(Debug, Clone)]
pub struct RatingsStore {
    scale: RatingScale,
    users: Vec<EntityToken>,
    items: Vec<EntityToken>,
    user_keys: Vec<String>,
    item_keys: Vec<String>,
    user_index: HashMap<EntityToken, usize>,
    item_index: HashMap<EntityToken, usize>,
    events: Vec<RatingEvent>,
    /// Per user, (item, rating) sorted by item.
    rows: Vec<Vec<(usize, f64)>>,
    /// Per item, (user, rating) sorted by user.
    cols: Vec<Vec<(usize, f64)>>,
    row_norms: Vec<f64>,
    col_norms: Vec<f64>,
    global_mean: Option<f64>,
}

impl RatingsStore {
    /// Builds the store; a repeated (user, movie) pair keeps its last
    /// record.
    pub fn from_records(records: &[RatingRecord], scale: RatingScale) -> Result<Self> {
        let mut users = Vec::new();
        let mut items = Vec::new();
        let mut user_index = HashMap::new();
        let mut item_index = HashMap::new();
        let mut by_pair: HashMap<(usize, usize), usize> = HashMap::new();
        let mut events: Vec<RatingEvent> = Vec::with_capacity(records.len());
        for (line, record) in records.iter().enumerate() {
            if !record.rating.is_finite() || !scale.contains(record.rating) {
                return Err(Error::RatingOutOfScale {
                    line: line as u64 + 1,
                    rating: record.rating,
                    min: scale.min,
                    max: scale.max,
                });
            }
            let user = *user_index.entry(record.user.clone()).or_insert_with(|| {
                users.push(record.user.clone());
                users.len() - 1
            });
            let item = *item_index.entry(record.movie.clone()).or_insert_with(|| {
                items.push(record.movie.clone());
                items.len() - 1
            });
            let event = RatingEvent {
                user,
                item,
                rating: record.rating,
                timestamp: record.timestamp,
            };
            match by_pair.get(&(user, item)) {
                Some(&id) => events[id] = event,
                None => {
                    by_pair.insert((user, item), events.len());
                    events.push(event);
                }
            }
        }
        events.sort_by_key(|e| (e.user, e.item));
        Ok(Self::assemble(scale, users, items, user_index, item_index, events))
    }

    fn assemble(
        scale: RatingScale,
        users: Vec<EntityToken>,
        items: Vec<EntityToken>,
        user_index: HashMap<EntityToken, usize>,
        item_index: HashMap<EntityToken, usize>,
        events: Vec<RatingEvent>,
    ) -> Self {
        let mut rows = vec![Vec::new(); users.len()];
        let mut cols = vec![Vec::new(); items.len()];
        for e in &events {
            rows[e.user].push((e.item, e.rating));
            cols[e.item].push((e.user, e.rating));
        }
        rows.iter_mut().for_each(|r| r.sort_by_key(|x| x.0));
        cols.iter_mut().for_each(|c| c.sort_by_key(|x| x.0));
        let l2 = |v: &Vec<(usize, f64)>| v.iter().map(|x| x.1 * x.1).sum::<f64>().sqrt();
        let row_norms = rows.iter().map(l2).collect();
        let col_norms = cols.iter().map(l2).collect();
        let global_mean = (!events.is_empty())
            .then(|| events.iter().map(|e| e.rating).sum::<f64>() / events.len() as f64);
        RatingsStore {
            scale,
            user_keys: users.iter().map(ToString::to_string).collect(),
            item_keys: items.iter().map(ToString::to_string).collect(),
            users,
            items,
            user_index,
            item_index,
            events,
            rows,
            cols,
            row_norms,
            col_norms,
            global_mean,
        }
    }

    /// The events whose ids satisfy `keep`, in the same index space.
    pub fn subset(&self, keep: impl Fn(usize) -> bool) -> RatingsStore {
        let events = self
            .events
            .iter()
            .enumerate()
            .filter(|(id, _)| keep(*id))
            .map(|(_, e)| e.clone())
            .collect();
        Self::assemble(
            self.scale,
            self.users.clone(),
            self.items.clone(),
            self.user_index.clone(),
            self.item_index.clone(),
            events,
        )
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn events(&self) -> &[RatingEvent] {
        &self.events
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn user_token(&self, user: usize) -> &EntityToken {
        &self.users[user]
    }

    pub fn item_token(&self, item: usize) -> &EntityToken {
        &self.items[item]
    }

    pub(crate) fn user_key(&self, user: usize) -> &str {
        &self.user_keys[user]
    }

    pub(crate) fn item_key(&self, item: usize) -> &str {
        &self.item_keys[item]
    }

    pub fn user_id(&self, token: &EntityToken) -> Option<usize> {
        self.user_index.get(token).copied()
    }

    pub fn item_id(&self, token: &EntityToken) -> Option<usize> {
        self.item_index.get(token).copied()
    }

    /// Ratings by `user`, sorted by item.
    pub fn user_ratings(&self, user: usize) -> &[(usize, f64)] {
        &self.rows[user]
    }

    /// Ratings of `item`, sorted by user.
    pub fn item_ratings(&self, item: usize) -> &[(usize, f64)] {
        &self.cols[item]
    }

    pub(crate) fn user_norm(&self, user: usize) -> f64 {
        self.row_norms[user]
    }

    pub(crate) fn item_norm(&self, item: usize) -> f64 {
        self.col_norms[item]
    }

    pub fn rating(&self, user: usize, item: usize) -> Option<f64> {
        let row = &self.rows[user];
        row.binary_search_by_key(&item, |x| x.0).ok().map(|i| row[i].1)
    }

    pub fn user_mean(&self, user: usize) -> Option<f64> {
        mean(&self.rows[user])
    }

    pub fn item_mean(&self, item: usize) -> Option<f64> {
        mean(&self.cols[item])
    }

    pub fn global_mean(&self) -> Option<f64> {
        self.global_mean
    }
}

fn mean(v: &[(usize, f64)]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().map(|x| x.1).sum::<f64>() / v.len() as f64)
}
