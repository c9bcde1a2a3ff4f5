//! JSON training configuration.

use std::fs;
use std::path::{Path, PathBuf};

use qrobot_core::gridworld::{parse_map, GridMap, DEFAULT_MAP};
use qrobot_core::qrl::QrlConfig;
use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// On-disk form of a training configuration. `lambda` has no default;
/// everything else falls back to [`QrlConfig::default`]. A relative
/// `map_path` is resolved against the config file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: f64,
    pub epsilon: Option<f64>,
    pub max_steps: Option<usize>,
    pub max_episodes: Option<usize>,
    pub step_reward: Option<f64>,
    pub goal_reward: Option<f64>,
    pub seed: Option<u64>,
    pub map_path: Option<PathBuf>,
}

impl ConfigFile {
    pub fn to_qrl_config(&self) -> QrlConfig {
        let d = QrlConfig::default();
        QrlConfig {
            alpha: self.alpha.unwrap_or(d.alpha),
            gamma: self.gamma.unwrap_or(d.gamma),
            lambda: self.lambda,
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            max_episodes: self.max_episodes.unwrap_or(d.max_episodes),
            step_reward: self.step_reward.unwrap_or(d.step_reward),
            goal_reward: self.goal_reward.unwrap_or(d.goal_reward),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

/// A validated configuration together with the map it refers to.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: QrlConfig,
    pub map: GridMap,
}

pub fn load_experiment(path: &Path) -> Result<Experiment> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file: ConfigFile =
        serde_json::from_str(&text).map_err(|e| HarnessError::config(path, e))?;
    let config = file.to_qrl_config();
    config.validate().map_err(|e| HarnessError::config(path, e))?;
    let map = match &file.map_path {
        Some(rel) => {
            let base = path.parent().unwrap_or(Path::new("."));
            load_map(&base.join(rel))?
        }
        None => parse_map(DEFAULT_MAP)?,
    };
    Ok(Experiment { config, map })
}

/// Reads a map file. Syntax errors are config errors; an unreachable goal
/// is a model error.
pub fn load_map(path: &Path) -> Result<GridMap> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_map(&text).map_err(|e| match e {
        qrobot_core::Error::Parse { .. } => HarnessError::config(path, e),
        other => other.into(),
    })
}
