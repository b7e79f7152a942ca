use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSpace;
use crate::error::{Error, Result};
use crate::text::PhraseConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub min_count: u64,
    pub dimension: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub subsample: f64,
    pub write_text: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = crate::embedding::TrainConfig::default();
        Self {
            min_count: 5,
            dimension: t.dimension,
            window: t.window,
            negatives: t.negatives,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            min_learning_rate: t.min_learning_rate,
            subsample: t.subsample,
            write_text: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpandSection {
    pub threshold: f64,
    pub antonyms: bool,
}

impl Default for ExpandSection {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            antonyms: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub k: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub space: ClusterSpace,
}

impl Default for ClusterSection {
    fn default() -> Self {
        Self {
            k: 6,
            k_min: 2,
            k_max: 25,
            restarts: 10,
            max_iters: 300,
            space: ClusterSpace::Raw,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreSection {
    pub exclude_subcategories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregateSection {
    pub bucket: String,
}

impl Default for AggregateSection {
    fn default() -> Self {
        Self {
            bucket: "days:10".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub neg_ratio: usize,
    pub train_frac: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            neg_ratio: 2,
            train_frac: 0.8,
        }
    }
}

/// Every stage parameter, written as `run_config.toml` next to each
/// stage's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    /// Input paths by name; flags override them.
    pub inputs: BTreeMap<String, String>,
    pub prepare: PhraseConfig,
    pub train: TrainSection,
    pub expand: ExpandSection,
    pub cluster: ClusterSection,
    pub score: ScoreSection,
    pub aggregate: AggregateSection,
    pub evaldataset: DatasetSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            workers: 1,
            inputs: BTreeMap::new(),
            prepare: PhraseConfig::default(),
            train: TrainSection::default(),
            expand: ExpandSection::default(),
            cluster: ClusterSection::default(),
            score: ScoreSection::default(),
            aggregate: AggregateSection::default(),
            evaldataset: DatasetSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Seed for one stage: the global seed mixed with the stage name.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        self.seed ^ fnv1a64(stage.as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
