use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{partition, FoldAssignment, NUM_FOLDS, TUNING_FOLD};
use super::metrics::sum_squared_error;
use crate::corpus::{
    build_sentences, build_vocabulary, ItemMetadata, RatingRecord, RatingScale, Sentence, TagRecord,
    DEFAULT_MAX_ACTORS,
};
use crate::embedding::{train, EmbeddingConfig, ModelKind};
use crate::error::{Error, Result};
use crate::hybrid::{fit_weights, HybridWeights};
use crate::recommender::{Model, NeighborOrder, Predictor, PredictorSpec, RatingsStore, SimilaritySource};
use crate::seed::derive_seed;
use crate::vectorspace::RepresentationStore;

pub const DEFAULT_KS: [usize; 5] = [5, 10, 20, 50, 100];

/// Ratings plus the side information that feeds sentences.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub ratings: RatingsStore,
    pub tags: Vec<TagRecord>,
    pub metadata: Vec<ItemMetadata>,
    pub max_actors: usize,
}

impl Dataset {
    pub fn new(
        records: &[RatingRecord],
        tags: Vec<TagRecord>,
        metadata: Vec<ItemMetadata>,
        scale: RatingScale,
    ) -> Result<Self> {
        Ok(Dataset {
            ratings: RatingsStore::from_records(records, scale)?,
            tags,
            metadata,
            max_actors: DEFAULT_MAX_ACTORS,
        })
    }

    /// One sentence per listed event. Tags reach a sentence only through
    /// its own (user, movie) pair, so tags of other events never leak in.
    pub fn sentences(&self, events: &[usize]) -> Vec<Sentence> {
        let store = &self.ratings;
        let records: Vec<RatingRecord> = events
            .iter()
            .map(|&id| {
                let e = &store.events()[id];
                RatingRecord {
                    user: store.user_token(e.user).clone(),
                    movie: store.item_token(e.item).clone(),
                    rating: e.rating,
                    timestamp: e.timestamp,
                }
            })
            .collect();
        build_sentences(&records, &self.tags, &self.metadata, self.max_actors)
    }
}

/// Representation length and training epochs, tuned jointly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EmbeddingPoint {
    pub dim: usize,
    pub epochs: usize,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub models: Vec<Model>,
    /// Neighborhood sizes, both the tuning grid and the reported series.
    pub ks: Vec<usize>,
    pub embedding_grid: Vec<EmbeddingPoint>,
    /// Template for the remaining training settings. Its model, dim,
    /// epochs, and seed are replaced per run.
    pub embedding: EmbeddingConfig,
    /// Learning rate for both models; `None` uses each model's default.
    pub lr: Option<f64>,
    pub order: NeighborOrder,
}

impl EvalConfig {
    pub fn new(models: Vec<Model>) -> Self {
        let embedding = EmbeddingConfig::new(ModelKind::Cbow);
        EvalConfig {
            models,
            ks: DEFAULT_KS.to_vec(),
            embedding_grid: vec![EmbeddingPoint {
                dim: embedding.dim,
                epochs: embedding.epochs,
            }],
            embedding,
            lr: None,
            order: NeighborOrder::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("neighborhood sizes must be positive and non-empty".into()));
        }
        if self.embedding_grid.is_empty() {
            return Err(Error::Config("embedding grid is empty".into()));
        }
        for &point in &self.embedding_grid {
            self.training_config(ModelKind::Cbow, point, "validate").validate()?;
        }
        Ok(())
    }

    fn training_config(&self, kind: ModelKind, point: EmbeddingPoint, stage: &str) -> EmbeddingConfig {
        let mut config = self.embedding.clone();
        config.model = kind;
        config.dim = point.dim;
        config.epochs = point.epochs;
        config.lr_initial = self.lr.unwrap_or(EmbeddingConfig::default_lr(kind));
        config.seed = derive_seed(self.embedding.seed, &format!("{stage}/{kind}/{}x{}", point.dim, point.epochs));
        config
    }
}

/// What one training/scoring round touched, as (user, item) index pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundTrace {
    pub test_fold: u8,
    pub train_pairs: Vec<(usize, usize)>,
    pub test_pairs: Vec<(usize, usize)>,
    /// The (user, movie) of every sentence used to train representations.
    pub corpus_pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub k: usize,
    pub embedding: Option<EmbeddingPoint>,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelChoice {
    pub model: Model,
    pub k: usize,
    pub embedding: Option<EmbeddingPoint>,
    pub rmse: f64,
    /// Every scored grid point, in enumeration order.
    pub grid: Vec<GridScore>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub model: Model,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridChoice {
    pub weights: Vec<WeightEntry>,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl HybridChoice {
    pub fn hybrid_weights(&self) -> Result<HybridWeights> {
        HybridWeights::new(self.weights.iter().map(|w| (w.model, w.alpha)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub choices: Vec<ModelChoice>,
    /// Present when two or more models were tuned.
    pub hybrid: Option<HybridChoice>,
    pub pairs: usize,
    #[serde(skip)]
    pub trace: RoundTrace,
}

impl Tuning {
    pub fn choice(&self, model: Model) -> Option<&ModelChoice> {
        self.choices.iter().find(|c| c.model == model)
    }
}

/// Per-fold RMSE with both aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold_rmse: Vec<f64>,
    /// Mean of the per-fold RMSEs.
    pub mean_rmse: f64,
    /// RMSE over all residuals of all folds together.
    pub pooled_rmse: f64,
}

impl FoldScore {
    /// From per-fold (sum of squared errors, count).
    pub fn from_folds(folds: &[(f64, usize)]) -> Self {
        let fold_rmse: Vec<f64> = folds.iter().map(|&(sse, n)| (sse / n as f64).sqrt()).collect();
        let mean_rmse = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
        let (sse, n) = folds.iter().fold((0.0, 0), |(s, c), &(a, b)| (s + a, c + b));
        FoldScore {
            fold_rmse,
            mean_rmse,
            pooled_rmse: (sse / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    #[serde(flatten)]
    pub score: FoldScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSeries {
    pub model: Model,
    pub points: Vec<KScore>,
    /// At the tuned k and representation.
    pub tuned: KScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridSeries {
    pub weights: Vec<WeightEntry>,
    #[serde(flatten)]
    pub score: FoldScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub partition_seed: u64,
    pub ks: Vec<usize>,
    pub tuning: Tuning,
    pub series: Vec<ModelSeries>,
    pub hybrid: Option<HybridSeries>,
    /// Scored pairs per cross-validation fold.
    pub fold_pairs: Vec<usize>,
    /// Scored pairs over all cross-validation folds.
    pub test_pairs: usize,
    #[serde(skip)]
    pub rounds: Vec<RoundTrace>,
}

impl EvalReport {
    pub fn series(&self, model: Model) -> Option<&ModelSeries> {
        self.series.iter().find(|s| s.model == model)
    }
}

/// Partitions, tunes on the fifth partition, then cross-validates on the
/// other four.
pub fn evaluate(dataset: &Dataset, config: &EvalConfig, partition_seed: u64) -> Result<EvalReport> {
    let assignment = partition(&dataset.ratings, partition_seed);
    let tuning = tune(dataset, &assignment, config)?;
    cross_validate(dataset, &assignment, config, tuning)
}

type Representations = HashMap<(ModelKind, EmbeddingPoint), Arc<RepresentationStore>>;

/// Trains every requested representation on the sentences of `events`.
fn train_representations(
    dataset: &Dataset,
    events: &[usize],
    needs: &[(ModelKind, EmbeddingPoint)],
    config: &EvalConfig,
    stage: &str,
) -> Result<(Representations, Vec<(usize, usize)>)> {
    let mut out = Representations::new();
    if needs.is_empty() {
        return Ok((out, Vec::new()));
    }
    let sentences = dataset.sentences(events);
    let store = &dataset.ratings;
    let corpus_pairs = sentences
        .iter()
        .map(|s| {
            let user = store.user_id(s.user()).expect("sentence user comes from the store");
            let item = store.item_id(s.movie()).expect("sentence movie comes from the store");
            (user, item)
        })
        .collect();
    let vocabulary = build_vocabulary(&sentences, 1)?;
    for &(kind, point) in needs {
        if out.contains_key(&(kind, point)) {
            continue;
        }
        info!("{stage}: training {kind} dim={} epochs={}", point.dim, point.epochs);
        let model = train(&sentences, &vocabulary, &config.training_config(kind, point, stage))?;
        out.insert((kind, point), Arc::new(RepresentationStore::from_model(&model)));
    }
    Ok((out, corpus_pairs))
}

/// Predictions for `pairs` under each k in `ks`, indexed `[k][pair]`.
fn predict_pairs(
    model: Model,
    train: &RatingsStore,
    representation: Option<Arc<RepresentationStore>>,
    pairs: &[(usize, usize)],
    ks: &[usize],
    order: NeighborOrder,
) -> Result<Vec<Vec<f64>>> {
    let source = match representation {
        Some(store) => SimilaritySource::Embeddings(store),
        None => SimilaritySource::RatingVectors,
    };
    let mut spec = PredictorSpec::new(model.target(), source, ks.iter().copied().max().unwrap_or(1));
    spec.order = order;
    let predictor = Predictor::new(&spec, train);
    let per_pair: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(u, i)| {
            predictor
                .predict_for_ks(u, i, ks)
                .map(|ps| ps.into_iter().map(|p| p.value).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..ks.len())
        .map(|k| per_pair.iter().map(|p| p[k]).collect())
        .collect())
}

fn pairs_of(store: &RatingsStore, events: &[usize]) -> (Vec<(usize, usize)>, Vec<f64>) {
    events
        .iter()
        .map(|&id| {
            let e = &store.events()[id];
            ((e.user, e.item), e.rating)
        })
        .unzip()
}

fn embedding_needs(models: &[Model], points: impl Fn(Model) -> Vec<EmbeddingPoint>) -> Vec<(ModelKind, EmbeddingPoint)> {
    let mut needs = Vec::new();
    for &model in models {
        if let Some(kind) = model.representation() {
            for point in points(model) {
                if !needs.contains(&(kind, point)) {
                    needs.push((kind, point));
                }
            }
        }
    }
    needs
}

/// Trains on folds 1–4 and scores every grid point on fold 5. Per model,
/// the lowest RMSE wins, earlier grid points winning ties; representation
/// points are enumerated outermost, then k. Hybrid weights are fitted on
/// the winners' fold-5 predictions.
pub fn tune(dataset: &Dataset, assignment: &FoldAssignment, config: &EvalConfig) -> Result<Tuning> {
    config.validate()?;
    let store = &dataset.ratings;
    check_assignment(store, assignment)?;
    let train_events = assignment.select(|f| f != TUNING_FOLD);
    let tune_events = assignment.events_in(TUNING_FOLD);
    if tune_events.is_empty() {
        return Err(Error::EmptyInput("tuning fold"));
    }
    let train_store = store.subset(|id| assignment.fold(id) != TUNING_FOLD);
    let (pairs, truths) = pairs_of(store, &tune_events);
    let needs = embedding_needs(&config.models, |_| config.embedding_grid.clone());
    let (representations, corpus_pairs) =
        train_representations(dataset, &train_events, &needs, config, "eval/tune")?;

    let mut choices = Vec::new();
    let mut winners: Vec<Vec<f64>> = Vec::new();
    for &model in &config.models {
        let points: Vec<Option<EmbeddingPoint>> = match model.representation() {
            Some(_) => config.embedding_grid.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        let mut grid = Vec::new();
        let mut best: Option<(usize, Vec<f64>)> = None;
        for point in points {
            let representation = point.map(|p| representations[&(model.representation().unwrap(), p)].clone());
            let predictions = predict_pairs(model, &train_store, representation, &pairs, &config.ks, config.order)?;
            for (ki, &k) in config.ks.iter().enumerate() {
                let rmse = (sum_squared_error(&predictions[ki], &truths)? / truths.len() as f64).sqrt();
                grid.push(GridScore { k, embedding: point, rmse });
                if best.as_ref().map_or(true, |(b, _)| rmse < grid[*b].rmse) {
                    best = Some((grid.len() - 1, predictions[ki].clone()));
                }
            }
        }
        let (index, predictions) = best.expect("grid is non-empty");
        let winner = grid[index].clone();
        info!("tuned {model}: k={} embedding={:?} rmse={:.4}", winner.k, winner.embedding, winner.rmse);
        choices.push(ModelChoice {
            model,
            k: winner.k,
            embedding: winner.embedding,
            rmse: winner.rmse,
            grid,
        });
        winners.push(predictions);
    }

    let hybrid = if config.models.len() >= 2 {
        let rows: Vec<(Vec<f64>, f64)> = (0..truths.len())
            .map(|p| (winners.iter().map(|w| w[p]).collect(), truths[p]))
            .collect();
        let fit = fit_weights(&rows)?;
        Some(HybridChoice {
            weights: config
                .models
                .iter()
                .zip(&fit.weights)
                .map(|(&model, &alpha)| WeightEntry { model, alpha })
                .collect(),
            rmse: fit.rmse,
            iterations: fit.iterations,
            converged: fit.converged,
        })
    } else {
        None
    };

    Ok(Tuning {
        choices,
        hybrid,
        pairs: pairs.len(),
        trace: RoundTrace {
            test_fold: TUNING_FOLD,
            train_pairs: train_store.events().iter().map(|e| (e.user, e.item)).collect(),
            test_pairs: pairs,
            corpus_pairs,
        },
    })
}

fn check_assignment(store: &RatingsStore, assignment: &FoldAssignment) -> Result<()> {
    if assignment.len() != store.events().len() {
        return Err(Error::CountMismatch {
            expected: store.events().len(),
            actual: assignment.len(),
        });
    }
    Ok(())
}

/// For each fold f in 1–4: trains on the other three (fold 5 excluded),
/// representations retrained on those folds' sentences only, and scores
/// fold f. Every model is scored at every k with its tuned
/// representation; the hybrid blends each model at its tuned k.
pub fn cross_validate(
    dataset: &Dataset,
    assignment: &FoldAssignment,
    config: &EvalConfig,
    tuning: Tuning,
) -> Result<EvalReport> {
    config.validate()?;
    let store = &dataset.ratings;
    check_assignment(store, assignment)?;
    let choice = |model: Model| {
        tuning
            .choice(model)
            .ok_or_else(|| Error::Config(format!("{model} was not tuned")))
    };
    for &model in &config.models {
        choice(model)?;
    }
    let hybrid_weights = tuning.hybrid.as_ref().map(HybridChoice::hybrid_weights).transpose()?;
    let needs = embedding_needs(&config.models, |m| choice(m).map(|c| c.embedding.into_iter().collect()).unwrap_or_default());
    let scale = store.scale();

    // [model][k or tuned][fold] -> (sse, n)
    let columns = config.ks.len() + 1;
    let mut sse = vec![vec![Vec::new(); columns]; config.models.len()];
    let mut hybrid_sse = Vec::new();
    let mut rounds = Vec::new();
    let mut fold_pairs = Vec::new();
    for test_fold in 1..NUM_FOLDS {
        let train_events = assignment.select(|f| f != test_fold && f != TUNING_FOLD);
        let test_events = assignment.events_in(test_fold);
        if test_events.is_empty() {
            return Err(Error::EmptyInput("cross-validation fold"));
        }
        let train_store = store.subset(|id| {
            let f = assignment.fold(id);
            f != test_fold && f != TUNING_FOLD
        });
        let (pairs, truths) = pairs_of(store, &test_events);
        let stage = format!("eval/round{test_fold}");
        let (representations, corpus_pairs) = train_representations(dataset, &train_events, &needs, config, &stage)?;

        let mut tuned_predictions = Vec::new();
        for (mi, &model) in config.models.iter().enumerate() {
            let chosen = choice(model)?;
            let mut ks = config.ks.clone();
            ks.push(chosen.k);
            let representation = chosen
                .embedding
                .map(|p| representations[&(model.representation().unwrap(), p)].clone());
            let predictions = predict_pairs(model, &train_store, representation, &pairs, &ks, config.order)?;
            for (column, p) in predictions.iter().enumerate() {
                sse[mi][column].push((sum_squared_error(p, &truths)?, truths.len()));
            }
            tuned_predictions.push(predictions.into_iter().last().expect("tuned column"));
        }
        if let Some(weights) = &hybrid_weights {
            let blended: Vec<f64> = (0..truths.len())
                .map(|p| {
                    let components: Vec<f64> = tuned_predictions.iter().map(|t| t[p]).collect();
                    weights.blend(&components, scale)
                })
                .collect::<Result<_>>()?;
            hybrid_sse.push((sum_squared_error(&blended, &truths)?, truths.len()));
        }
        info!("round {test_fold}: {} test pairs", pairs.len());
        fold_pairs.push(pairs.len());
        rounds.push(RoundTrace {
            test_fold,
            train_pairs: train_store.events().iter().map(|e| (e.user, e.item)).collect(),
            test_pairs: pairs,
            corpus_pairs,
        });
    }

    let series = config
        .models
        .iter()
        .enumerate()
        .map(|(mi, &model)| ModelSeries {
            model,
            points: config
                .ks
                .iter()
                .enumerate()
                .map(|(ki, &k)| KScore {
                    k,
                    score: FoldScore::from_folds(&sse[mi][ki]),
                })
                .collect(),
            tuned: KScore {
                k: tuning.choices.iter().find(|c| c.model == model).map_or(0, |c| c.k),
                score: FoldScore::from_folds(&sse[mi][columns - 1]),
            },
        })
        .collect();
    let hybrid = tuning.hybrid.as_ref().map(|h| HybridSeries {
        weights: h.weights.clone(),
        score: FoldScore::from_folds(&hybrid_sse),
    });
    Ok(EvalReport {
        partition_seed: assignment.seed,
        ks: config.ks.clone(),
        test_pairs: fold_pairs.iter().sum(),
        fold_pairs,
        tuning,
        series,
        hybrid,
        rounds,
    })
}

/// Scores an arbitrary predictor with the cross-validation folds: for each
/// fold f in 1–4, `predict` sees a store of the other three folds and the
/// fold-f pairs.
pub fn score_folds<F>(store: &RatingsStore, assignment: &FoldAssignment, mut predict: F) -> Result<FoldScore>
where
    F: FnMut(&RatingsStore, &[(usize, usize)]) -> Result<Vec<f64>>,
{
    check_assignment(store, assignment)?;
    let mut folds = Vec::new();
    for test_fold in 1..NUM_FOLDS {
        let train = store.subset(|id| {
            let f = assignment.fold(id);
            f != test_fold && f != TUNING_FOLD
        });
        let (pairs, truths) = pairs_of(store, &assignment.events_in(test_fold));
        let predictions = predict(&train, &pairs)?;
        folds.push((sum_squared_error(&predictions, &truths)?, truths.len()));
    }
    Ok(FoldScore::from_folds(&folds))
}

/// (user, item) pairs of the events in any of `folds`.
pub fn fold_pairs(store: &RatingsStore, assignment: &FoldAssignment, folds: &[u8]) -> HashSet<(usize, usize)> {
    assignment
        .select(|f| folds.contains(&f))
        .into_iter()
        .map(|id| (store.events()[id].user, store.events()[id].item))
        .collect()
}
