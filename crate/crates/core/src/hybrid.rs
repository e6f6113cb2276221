//! Linear weighted hybrid: a convex combination of component predictions,
//! with weights fitted by projected gradient on the probability simplex.

use std::io::{BufRead, Write};

use crate::corpus::RatingScale;
use crate::error::{Error, Result};
use crate::kv;
use crate::recommender::Model;

/// Weights must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Non-negative blend weights over named components, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridWeights {
    entries: Vec<(Model, f64)>,
}

impl HybridWeights {
    pub fn new(entries: Vec<(Model, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("hybrid weights"));
        }
        for (i, (model, alpha)) in entries.iter().enumerate() {
            if !alpha.is_finite() || *alpha < 0.0 {
                return Err(Error::Config(format!("weight for {model} must be non-negative, got {alpha}")));
            }
            if entries[..i].iter().any(|(m, _)| m == model) {
                return Err(Error::Config(format!("duplicate weight for {model}")));
            }
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Config(format!("weights sum to {total}, expected 1")));
        }
        Ok(HybridWeights { entries })
    }

    pub fn uniform(models: &[Model]) -> Result<Self> {
        let w = 1.0 / models.len() as f64;
        Self::new(models.iter().map(|&m| (m, w)).collect())
    }

    pub fn models(&self) -> Vec<Model> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn entries(&self) -> &[(Model, f64)] {
        &self.entries
    }

    pub fn get(&self, model: Model) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == model).map(|e| e.1)
    }

    /// `Σ α_j p_j` clamped to `scale`; predictions are in entry order.
    pub fn blend(&self, predictions: &[f64], scale: RatingScale) -> Result<f64> {
        blend(predictions, &self.alphas()).map(|v| scale.clamp(v))
    }

    pub fn read<R: BufRead>(source: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (key, value) in kv::parse(source)? {
            let model: Model = key.parse()?;
            let alpha: f64 = value
                .parse()
                .map_err(|_| Error::Config(format!("invalid weight {value:?} for {model}")))?;
            entries.push((model, alpha));
        }
        Self::new(entries)
    }

    pub fn write<W: Write>(&self, sink: W) -> Result<()> {
        let pairs: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|&(m, a)| (m.name().to_string(), a))
            .collect();
        kv::write(&pairs, sink)?;
        Ok(())
    }
}

/// Unclamped `Σ α_j p_j`.
pub fn blend(predictions: &[f64], weights: &[f64]) -> Result<f64> {
    if predictions.len() != weights.len() {
        return Err(Error::CountMismatch {
            expected: weights.len(),
            actual: predictions.len(),
        });
    }
    Ok(predictions.iter().zip(weights).map(|(p, a)| p * a).sum())
}

/// Ridge pulling flat directions toward the uniform point.
const RIDGE: f64 = 1e-12;
const TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFit {
    pub weights: Vec<f64>,
    /// RMSE of the unclamped blend over the fitting rows.
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Euclidean projection onto `{x : x ≥ 0, Σ x = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Minimizes squared blend error over the simplex.
///
/// Accelerated projected gradient (with restarts) on the mean squared
/// error plus a `1e-12` ridge toward uniform weights, stopped when the
/// gradient mapping drops below `1e-8` or after 10,000 iterations. The
/// active face is then re-solved exactly and kept when it scores better.
pub fn fit_weights(rows: &[(Vec<f64>, f64)]) -> Result<WeightFit> {
    let Some((first, _)) = rows.first() else {
        return Err(Error::EmptyInput("tuning rows"));
    };
    let m = first.len();
    if m == 0 {
        return Err(Error::EmptyInput("components"));
    }
    if let Some((p, _)) = rows.iter().find(|(p, _)| p.len() != m) {
        return Err(Error::CountMismatch {
            expected: m,
            actual: p.len(),
        });
    }
    let n = rows.len() as f64;
    let uniform = vec![1.0 / m as f64; m];

    // Gram matrix and correlation vector of the mean squared error.
    let mut gram = vec![vec![0.0; m]; m];
    let mut corr = vec![0.0; m];
    for (p, y) in rows {
        for a in 0..m {
            corr[a] += p[a] * y / n;
            for b in 0..m {
                gram[a][b] += p[a] * p[b] / n;
            }
        }
    }
    let gradient = |alpha: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|a| {
                let qa: f64 = (0..m).map(|b| gram[a][b] * alpha[b]).sum();
                2.0 * (qa - corr[a]) + 2.0 * RIDGE * (alpha[a] - uniform[a])
            })
            .collect()
    };
    // The Gram matrix is PSD, so its trace bounds the largest eigenvalue.
    let lipschitz = 2.0 * ((0..m).map(|a| gram[a][a]).sum::<f64>() + RIDGE);
    let objective = |alpha: &[f64]| mse(rows, alpha) + RIDGE * sq_dist(alpha, &uniform);

    let mut alpha = uniform.clone();
    let mut iterations = 0;
    let mut converged = m == 1;
    if m > 1 && lipschitz > 0.0 {
        let step = 1.0 / lipschitz;
        let mut momentum_point = alpha.clone();
        let mut t = 1.0f64;
        let mut current = objective(&alpha);
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            let g = gradient(&momentum_point);
            let candidate: Vec<f64> = momentum_point
                .iter()
                .zip(&g)
                .map(|(x, gx)| x - step * gx)
                .collect();
            let next = project_to_simplex(&candidate);
            let value = objective(&next);
            if value > current {
                // Restart momentum from the last accepted point.
                momentum_point = alpha.clone();
                t = 1.0;
                continue;
            }
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            let beta = (t - 1.0) / t_next;
            momentum_point = next
                .iter()
                .zip(&alpha)
                .map(|(x, prev)| x + beta * (x - prev))
                .collect();
            alpha = next;
            current = value;
            t = t_next;

            let g = gradient(&alpha);
            let stepped: Vec<f64> = alpha.iter().zip(&g).map(|(x, gx)| x - step * gx).collect();
            let mapped = project_to_simplex(&stepped);
            let mapping_norm = lipschitz * sq_dist(&alpha, &mapped).sqrt();
            if mapping_norm < TOLERANCE {
                converged = true;
                break;
            }
        }
        if let Some(polished) = solve_face(&gram, &corr, &uniform, &alpha) {
            let before = objective(&alpha);
            // Rounding alone must not move the weights.
            if objective(&polished) < before - 1e-14 * before {
                alpha = polished;
            }
        }
    } else if m > 1 {
        // All predictions are zero: every weighting is equivalent.
        converged = true;
    }
    Ok(WeightFit {
        rmse: mse(rows, &alpha).sqrt(),
        weights: alpha,
        iterations,
        converged,
    })
}

fn mse(rows: &[(Vec<f64>, f64)], alpha: &[f64]) -> f64 {
    rows.iter()
        .map(|(p, y)| {
            let r: f64 = p.iter().zip(alpha).map(|(x, a)| x * a).sum::<f64>() - y;
            r * r
        })
        .sum::<f64>()
        / rows.len() as f64
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact minimizer on the face spanned by the positive entries of `alpha`,
/// if it is feasible.
fn solve_face(gram: &[Vec<f64>], corr: &[f64], uniform: &[f64], alpha: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0.0).collect();
    let s = support.len();
    // [2(Q + ρI)  1] [a]   [2(c + ρu)]
    // [   1ᵀ      0] [μ] = [    1    ]
    let mut system = vec![vec![0.0; s + 2]; s + 1];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            system[r][c] = 2.0 * gram[i][j] + if i == j { 2.0 * RIDGE } else { 0.0 };
        }
        system[r][s] = 1.0;
        system[r][s + 1] = 2.0 * (corr[i] + RIDGE * uniform[i]);
        system[s][r] = 1.0;
    }
    system[s][s + 1] = 1.0;
    let solution = gaussian_solve(system)?;
    if solution[..s].iter().any(|&x| !x.is_finite() || x < 0.0) {
        return None;
    }
    let mut out = vec![0.0; alpha.len()];
    for (r, &i) in support.iter().enumerate() {
        out[i] = solution[r];
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    Some(out)
}

/// Solves an augmented system `[A | b]` by elimination with partial
/// pivoting.
fn gaussian_solve(mut system: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = system.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| system[a][col].abs().total_cmp(&system[b][col].abs()))?;
        if system[pivot][col].abs() < 1e-300 {
            return None;
        }
        system.swap(col, pivot);
        for row in col + 1..n {
            let factor = system[row][col] / system[col][col];
            for k in col..=n {
                system[row][k] -= factor * system[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| system[row][k] * x[k]).sum();
        x[row] = (system[row][n] - tail) / system[row][row];
    }
    Some(x)
}
