use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explore::Policy;
use crate::grid::{SynthSpec, DEFAULT_CLEARANCE, DEFAULT_SPACING};
use crate::model::Hyperparameters;
use crate::teacher::AnswerMode;

/// A complete run description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Hyperparameters,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    #[default]
    Synth,
    Map,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub kind: EnvKind,
    /// Seed of the synthetic floor plan.
    pub seed: u64,
    pub spacing: f64,
    pub clearance: f64,
    /// Initial robot position; defaults to the candidate nearest the
    /// centroid of all candidates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
    pub synth: SynthSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapFiles>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            kind: EnvKind::Synth,
            seed: 0,
            spacing: DEFAULT_SPACING,
            clearance: DEFAULT_CLEARANCE,
            start: None,
            synth: SynthSpec::default(),
            map: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFiles {
    pub image: PathBuf,
    pub metadata: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub name: Policy,
    /// Travel-cost weight; defaults to the model's `eta`. Only the
    /// cost-aware policy uses it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            name: Policy::Spcoae,
            eta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabularyMode {
    /// Fixed at session start from the annotation's full inventory.
    #[default]
    Frozen,
    /// Starts empty and grows with every new word.
    Growing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Step budget; defaults to the candidate count without revisits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    pub revisit: bool,
    pub answers: AnswerMode,
    pub vocabulary: VocabularyMode,
    /// Stop once the best information gain stays below the threshold for
    /// `ig_stop_patience` consecutive steps.
    pub ig_stop: bool,
    pub ig_stop_threshold: f64,
    pub ig_stop_patience: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            steps: None,
            revisit: false,
            answers: AnswerMode::SingleWord,
            vocabulary: VocabularyMode::Frozen,
            ig_stop: false,
            ig_stop_threshold: 0.01,
            ig_stop_patience: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub policies: Vec<Policy>,
    pub seeds: Vec<u64>,
    /// Synthetic floor-plan seeds; ignored for file maps.
    #[serde(default = "default_env_seeds")]
    pub env_seeds: Vec<u64>,
}

fn default_env_seeds() -> Vec<u64> {
    vec![0]
}

impl Config {
    /// Parses a TOML document; relative map paths resolve against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let (Some(base), Some(map)) = (base, cfg.env.map.as_mut()) {
            for p in [
                Some(&mut map.image),
                Some(&mut map.metadata),
                map.annotation.as_mut(),
            ]
            .into_iter()
            .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&std::fs::read_to_string(path)?, path.parent())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.env.spacing > 0.0) || !(self.env.clearance >= 0.0) {
            return Err(Error::Config(
                "spacing must be > 0 and clearance >= 0".into(),
            ));
        }
        if self.env.kind == EnvKind::Map && self.env.map.is_none() {
            return Err(Error::Config(
                "env.kind = \"map\" needs an [env.map] table".into(),
            ));
        }
        if self.run.revisit && self.run.steps.is_none() {
            return Err(Error::Config("revisit mode needs run.steps".into()));
        }
        if self.run.ig_stop_patience == 0 {
            return Err(Error::Config("ig_stop_patience must be >= 1".into()));
        }
        if let Some(eta) = self.policy.eta {
            if !(eta >= 0.0) {
                return Err(Error::Config("policy.eta must be >= 0".into()));
            }
        }
        if let Some(s) = &self.suite {
            if s.policies.is_empty() || s.seeds.is_empty() || s.env_seeds.is_empty() {
                return Err(Error::Config("suite lists must be non-empty".into()));
            }
        }
        Ok(())
    }

    /// Travel-cost weight applied by the configured policy.
    pub fn eta(&self) -> f64 {
        self.policy
            .name
            .eta(self.policy.eta.unwrap_or(self.model.eta))
    }
}
