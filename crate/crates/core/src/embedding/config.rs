use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv;

/// Largest vocabulary for which the exact softmax loss is allowed.
pub const EXACT_SOFTMAX_MAX_VOCAB: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Predict a token from the mean of its context.
    Cbow,
    /// Predict each context token from the center token.
    SkipGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    NegativeSampling,
    HierarchicalSoftmax,
    ExactSoftmax,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Cbow => "cbow",
            ModelKind::SkipGram => "sg",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cbow" => Ok(ModelKind::Cbow),
            "sg" | "skipgram" | "skip-gram" => Ok(ModelKind::SkipGram),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::NegativeSampling => "ns",
            LossKind::HierarchicalSoftmax => "hs",
            LossKind::ExactSoftmax => "exact",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ns" => Ok(LossKind::NegativeSampling),
            "hs" => Ok(LossKind::HierarchicalSoftmax),
            "exact" => Ok(LossKind::ExactSoftmax),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub model: ModelKind,
    pub loss: LossKind,
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    /// Negative samples per positive example; only used by negative sampling.
    pub negatives: usize,
    pub lr_initial: f64,
    pub lr_final: f64,
    pub noise_exponent: f64,
    pub seed: u64,
    pub workers: usize,
}

impl EmbeddingConfig {
    /// Defaults for `model`: 100 dimensions, window 10, 5 epochs, 5
    /// negatives, learning rate 0.05 (CBOW) or 0.025 (Skip-gram) decaying
    /// linearly to 1e-4.
    pub fn new(model: ModelKind) -> Self {
        EmbeddingConfig {
            model,
            loss: LossKind::NegativeSampling,
            dim: 100,
            window: 10,
            epochs: 5,
            negatives: 5,
            lr_initial: Self::default_lr(model),
            lr_final: 1e-4,
            noise_exponent: 0.75,
            seed: 1,
            workers: 1,
        }
    }

    pub fn default_lr(model: ModelKind) -> f64 {
        match model {
            ModelKind::Cbow => 0.05,
            ModelKind::SkipGram => 0.025,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("workers", self.workers),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.lr_initial.is_finite() && self.lr_initial > 0.0) {
            return Err(Error::Config("lr_initial must be positive".into()));
        }
        if !(self.lr_final >= 0.0 && self.lr_final <= self.lr_initial) {
            return Err(Error::Config(
                "lr_final must lie in [0, lr_initial]".into(),
            ));
        }
        if !self.noise_exponent.is_finite() {
            return Err(Error::Config("noise_exponent must be finite".into()));
        }
        Ok(())
    }

    /// Overrides fields from a flat `key = value` file. Unknown keys are an
    /// error. Setting `model` without `lr` resets the learning rate to that
    /// model's default.
    pub fn apply_kv<R: BufRead>(&mut self, source: R) -> Result<()> {
        let pairs = kv::parse(source)?;
        let mut lr_set = false;
        let mut model_set = false;
        for (key, value) in &pairs {
            let bad = || Error::Config(format!("invalid value {value:?} for {key}"));
            match key.as_str() {
                "model" => {
                    self.model = value.parse()?;
                    model_set = true;
                }
                "loss" => self.loss = value.parse()?,
                "dim" => self.dim = value.parse().map_err(|_| bad())?,
                "window" => self.window = value.parse().map_err(|_| bad())?,
                "epochs" => self.epochs = value.parse().map_err(|_| bad())?,
                "negatives" => self.negatives = value.parse().map_err(|_| bad())?,
                "lr" | "lr_initial" => {
                    self.lr_initial = value.parse().map_err(|_| bad())?;
                    lr_set = true;
                }
                "lr_final" => self.lr_final = value.parse().map_err(|_| bad())?,
                "noise_exponent" => self.noise_exponent = value.parse().map_err(|_| bad())?,
                "seed" => self.seed = value.parse().map_err(|_| bad())?,
                "workers" => self.workers = value.parse().map_err(|_| bad())?,
                other => return Err(Error::Config(format!("unknown config key {other:?}"))),
            }
        }
        if model_set && !lr_set {
            self.lr_initial = Self::default_lr(self.model);
        }
        self.validate()
    }

    /// The flat `key = value` form accepted by [`EmbeddingConfig::apply_kv`].
    pub fn to_kv(&self) -> Vec<(String, String)> {
        vec![
            ("model".into(), self.model.to_string()),
            ("loss".into(), self.loss.to_string()),
            ("dim".into(), self.dim.to_string()),
            ("window".into(), self.window.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("negatives".into(), self.negatives.to_string()),
            ("lr".into(), self.lr_initial.to_string()),
            ("lr_final".into(), self.lr_final.to_string()),
            ("noise_exponent".into(), self.noise_exponent.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("workers".into(), self.workers.to_string()),
        ]
    }
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig::new(ModelKind::SkipGram)
    }
}
