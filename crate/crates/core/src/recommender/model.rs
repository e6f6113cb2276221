use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::similarity::Target;
use crate::embedding::ModelKind;
use crate::error::{Error, Result};

/// The six component recommenders: user- or item-based neighborhoods over
/// rating vectors (CF), CBOW vectors (CB), or Skip-gram vectors (SG).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Model {
    Ubcf,
    Ibcf,
    Ubcb,
    Ibcb,
    Ubsg,
    Ibsg,
}

impl Model {
    pub const ALL: [Model; 6] = [
        Model::Ubcf,
        Model::Ibcf,
        Model::Ubcb,
        Model::Ibcb,
        Model::Ubsg,
        Model::Ibsg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Ubcf => "UBCF",
            Model::Ibcf => "IBCF",
            Model::Ubcb => "UBCB",
            Model::Ibcb => "IBCB",
            Model::Ubsg => "UBSG",
            Model::Ibsg => "IBSG",
        }
    }

    pub fn target(self) -> Target {
        match self {
            Model::Ubcf | Model::Ubcb | Model::Ubsg => Target::UserBased,
            Model::Ibcf | Model::Ibcb | Model::Ibsg => Target::ItemBased,
        }
    }

    /// The embedding model supplying similarities, or `None` for rating
    /// vectors.
    pub fn representation(self) -> Option<ModelKind> {
        match self {
            Model::Ubcf | Model::Ibcf => None,
            Model::Ubcb | Model::Ibcb => Some(ModelKind::Cbow),
            Model::Ubsg | Model::Ibsg => Some(ModelKind::SkipGram),
        }
    }

    /// Parses a comma-separated list such as `ubcf,ibcb`.
    pub fn parse_list(text: &str) -> Result<Vec<Model>> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let model: Model = part.parse()?;
            if !out.contains(&model) {
                out.push(model);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("empty model list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Model::ALL
            .into_iter()
            .find(|m| m.name() == upper)
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}
