//! Learned representations as a queryable store: cosine similarity, ranked
//! neighbors with entity-type filtering, and vector arithmetic over tokens.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::corpus::{EntityToken, Namespace};
use crate::embedding::{EmbeddingModel, Matrix};
use crate::error::{Error, Result};

/// Token vectors with precomputed L2 norms. Zero vectors are stored but
/// never returned by or accepted in queries.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationStore {
    dim: usize,
    tokens: Vec<EntityToken>,
    canonical: Vec<String>,
    vectors: Matrix,
    norms: Vec<f64>,
    index: HashMap<EntityToken, usize>,
}

impl RepresentationStore {
    pub fn from_rows<I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (EntityToken, Vec<f64>)>,
    {
        let mut tokens = Vec::new();
        let mut data = Vec::new();
        let mut index = HashMap::new();
        for (token, vector) in rows {
            if vector.len() != dim {
                return Err(Error::Shape(format!(
                    "{token} has {} components, expected {dim}",
                    vector.len()
                )));
            }
            if let Some(bad) = vector.iter().find(|x| !x.is_finite()) {
                return Err(Error::Shape(format!("{token} has non-finite component {bad}")));
            }
            if index.insert(token.clone(), tokens.len()).is_some() {
                return Err(Error::DuplicateToken(token.to_string()));
            }
            tokens.push(token);
            data.extend(vector);
        }
        let vectors = Matrix::from_vec(tokens.len(), dim, data);
        let norms = (0..tokens.len())
            .map(|i| vectors.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        let canonical = tokens.iter().map(ToString::to_string).collect();
        Ok(RepresentationStore {
            dim,
            tokens,
            canonical,
            vectors,
            norms,
            index,
        })
    }

    /// Input vectors of a model, in vocabulary order.
    pub fn from_model(model: &EmbeddingModel) -> Self {
        let rows = model
            .vocabulary
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), model.input_vectors.row(i).to_vec()));
        Self::from_rows(model.dim(), rows).expect("model rows are unique and finite")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// A single-token store can answer lookups but not train.
    pub fn query_only(&self) -> bool {
        self.tokens.len() < 2
    }

    pub fn tokens(&self) -> &[EntityToken] {
        &self.tokens
    }

    pub fn position(&self, token: &EntityToken) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn vector(&self, token: &EntityToken) -> Option<&[f64]> {
        self.position(token).map(|i| self.vectors.row(i))
    }

    pub fn row(&self, position: usize) -> &[f64] {
        self.vectors.row(position)
    }

    pub fn norm(&self, position: usize) -> f64 {
        self.norms[position]
    }

    pub fn is_queryable(&self, token: &EntityToken) -> bool {
        self.position(token).is_some_and(|i| self.norms[i] > 0.0)
    }

    /// Cosine between two stored tokens' vectors.
    pub fn similarity(&self, a: usize, b: usize) -> Result<f64> {
        let (na, nb) = (self.norms[a], self.norms[b]);
        if na == 0.0 || nb == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(clamp_unit(dot(self.vectors.row(a), self.vectors.row(b)) / (na * nb)))
    }

    /// Vector of `token`, or an error naming it when missing or zero.
    fn operand(&self, token: &EntityToken) -> Result<(&[f64], f64)> {
        let i = self
            .position(token)
            .ok_or_else(|| Error::UnknownToken(token.to_string()))?;
        if self.norms[i] == 0.0 {
            return Err(Error::Unqueryable(token.to_string()));
        }
        Ok((self.vectors.row(i), self.norms[i]))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `a·b / (|a| |b|)`, clamped to `[-1, 1]`.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("lengths {} and {}", a.len(), b.len())));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(clamp_unit(dot(a, b) / (na * nb)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: EntityToken,
    pub similarity: f64,
}

/// The `k` most cosine-similar queryable tokens to `query`, restricted to
/// `filter` and skipping `exclude`. Ties go to the smaller canonical string.
pub fn nearest(
    store: &RepresentationStore,
    query: &[f64],
    k: usize,
    filter: Option<Namespace>,
    exclude: &HashSet<EntityToken>,
) -> Result<Vec<Neighbor>> {
    if query.len() != store.dim() {
        return Err(Error::Shape(format!(
            "query has {} components, store has {}",
            query.len(),
            store.dim()
        )));
    }
    let qnorm = norm(query);
    if qnorm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut scored: Vec<(f64, usize)> = store
        .tokens
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            store.norms[*i] > 0.0
                && filter.is_none_or(|ns| t.namespace() == ns)
                && !exclude.contains(*t)
        })
        .map(|(i, _)| {
            let sim = clamp_unit(dot(store.vectors.row(i), query) / (qnorm * store.norms[i]));
            (sim, i)
        })
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| {
        b.0.total_cmp(&a.0)
            .then_with(|| store.canonical[a.1].cmp(&store.canonical[b.1]))
    };
    if k < scored.len() {
        scored.select_nth_unstable_by(k, order);
        scored.truncate(k);
    }
    scored.sort_by(order);
    Ok(scored
        .into_iter()
        .map(|(similarity, i)| Neighbor {
            token: store.tokens[i].clone(),
            similarity,
        })
        .collect())
}

/// `Σ plus - Σ minus` over L2-normalized operand vectors, then a neighbor
/// search.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithmeticQuery {
    pub plus: Vec<EntityToken>,
    pub minus: Vec<EntityToken>,
    pub filter: Option<Namespace>,
    pub k: usize,
    /// Drop the operand tokens from the neighbor list.
    pub exclude_operands: bool,
}

impl ArithmeticQuery {
    pub fn new(plus: Vec<EntityToken>, minus: Vec<EntityToken>, k: usize) -> Self {
        ArithmeticQuery {
            plus,
            minus,
            filter: None,
            k,
            exclude_operands: true,
        }
    }

    pub fn with_filter(mut self, filter: Option<Namespace>) -> Self {
        self.filter = filter;
        self
    }
}

/// Results whose norm falls below this are treated as the zero vector.
const DEGENERATE_NORM: f64 = 1e-9;

pub fn combine(query: &ArithmeticQuery, store: &RepresentationStore) -> Result<(Vec<f64>, Vec<Neighbor>)> {
    if query.plus.is_empty() {
        return Err(Error::EmptyInput("arithmetic query needs at least one positive operand"));
    }
    if query.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mut result = vec![0.0; store.dim()];
    let signed = query
        .plus
        .iter()
        .map(|t| (t, 1.0))
        .chain(query.minus.iter().map(|t| (t, -1.0)));
    for (token, sign) in signed {
        let (vector, n) = store.operand(token)?;
        for (r, x) in result.iter_mut().zip(vector) {
            *r += sign * x / n;
        }
    }
    if norm(&result) < DEGENERATE_NORM {
        return Err(Error::DegenerateQuery);
    }
    let exclude: HashSet<EntityToken> = if query.exclude_operands {
        query.plus.iter().chain(&query.minus).cloned().collect()
    } else {
        HashSet::new()
    };
    let neighbors = nearest(store, &result, query.k, query.filter, &exclude)?;
    Ok((result, neighbors))
}

/// Aligned plain-text table: rank, token, type, similarity.
pub fn format_table(neighbors: &[Neighbor]) -> String {
    let width = neighbors
        .iter()
        .map(|n| n.token.to_string().len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:>4}  {:<width$}  {:<8}  {:>10}", "rank", "token", "type", "similarity");
    for (i, n) in neighbors.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:<8}  {:>10.4}",
            i + 1,
            n.token.to_string(),
            n.token.namespace().name(),
            n.similarity
        );
    }
    out
}

/// One JSON object per line with `token`, `namespace`, and `similarity`
/// (4 decimal places).
pub fn format_json_lines(neighbors: &[Neighbor]) -> String {
    let mut out = String::new();
    for n in neighbors {
        let _ = writeln!(
            out,
            "{{\"token\":{},\"namespace\":\"{}\",\"similarity\":{:.4}}}",
            serde_json::Value::String(n.token.to_string()),
            n.token.namespace().name(),
            n.similarity
        );
    }
    out
}
