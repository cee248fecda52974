//! Run configuration shared by the pipeline, the CLI and persisted maps.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{Intrinsics, DEFAULT_EPSILON_Z};
use crate::landmarks::ClusterConfig;
use crate::memory::MemoryConfig;
use crate::textsim::SimilarityConfig;
use crate::Error;

pub const DEFAULT_BORDER_MARGIN: f64 = 20.0;
pub const DEFAULT_ASSOCIATION_WINDOW_S: f64 = 0.05;

fn default_margin() -> f64 {
    DEFAULT_BORDER_MARGIN
}

fn default_window() -> f64 {
    DEFAULT_ASSOCIATION_WINDOW_S
}

fn default_epsilon_z() -> f64 {
    DEFAULT_EPSILON_Z
}

/// Everything except the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default)]
    pub similarity: SimilarityConfig,
    #[serde(default)]
    pub memory: MemoryConfig,
    #[serde(default = "default_margin")]
    pub border_margin: f64,
    #[serde(default)]
    pub cluster: ClusterConfig,
    /// Max |t_detection − t_pose| when joining a detection log to a trajectory.
    #[serde(default = "default_window")]
    pub association_window_s: f64,
    /// Offer every distilled record to navigation, not only landmarks.
    #[serde(default)]
    pub navigate_all_records: bool,
    #[serde(default = "default_epsilon_z")]
    pub epsilon_z: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            similarity: SimilarityConfig::default(),
            memory: MemoryConfig::default(),
            border_margin: DEFAULT_BORDER_MARGIN,
            cluster: ClusterConfig::default(),
            association_window_s: DEFAULT_ASSOCIATION_WINDOW_S,
            navigate_all_records: false,
            epsilon_z: DEFAULT_EPSILON_Z,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.similarity.validate()?;
        self.memory.validate()?;
        self.cluster.validate()?;
        if !(self.border_margin >= 0.0) {
            return Err(Error::Config(format!("border_margin must be >= 0, got {}", self.border_margin)));
        }
        if !(self.association_window_s >= 0.0) {
            return Err(Error::Config("association_window_s must be >= 0".into()));
        }
        if !(self.epsilon_z > 0.0) {
            return Err(Error::Config("epsilon_z must be positive".into()));
        }
        Ok(())
    }
}

/// The JSON config file: camera intrinsics plus engine settings at top level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub intrinsics: Intrinsics,
    #[serde(flatten)]
    pub engine: EngineConfig,
}

impl RunConfig {
    pub fn new(intrinsics: Intrinsics) -> Self {
        Self {
            intrinsics,
            engine: EngineConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.intrinsics.validate()?;
        self.engine.validate()
    }
}
