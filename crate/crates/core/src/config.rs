//! Versioned JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factory::{generation_pipeline, NoiseSpec};
use crate::measurement::projector_probability;
use crate::stabilizer::{GraphSpec, DEFAULT_MAX_PRODUCT_SIZE};
use crate::tomography::{DEFAULT_BOOTSTRAP_REPLICAS, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub const CONFIG_SCHEMA: &str = "mixed-ghz/run-config/v1";

pub const DEFAULT_EVENTS_PER_SETTING: f64 = 1900.0;
pub const DEFAULT_DURATION_S: f64 = 60.0;
/// Mean `VVVD` count per run that fixes the default tomography rate.
pub const VVVD_TARGET_COUNTS: f64 = 120.0;

/// Rate constant giving [`VVVD_TARGET_COUNTS`] in [`DEFAULT_DURATION_S`] on the calibrated state.
pub fn calibrated_tomography_rate() -> f64 {
    let rho = generation_pipeline(&NoiseSpec::calibrated())
        .expect("calibrated pipeline")
        .output;
    let p = projector_probability(&rho, &"VVVD".parse().expect("projector")).expect("four qubits");
    VVVD_TARGET_COUNTS / (DEFAULT_DURATION_S * p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum GraphConfig {
    TShaped { n: usize },
    Linear { n: usize },
    Custom { n: usize, edges: Vec<(usize, usize)> },
}

impl GraphConfig {
    pub fn build(&self) -> Result<GraphSpec> {
        match self {
            GraphConfig::TShaped { n } => GraphSpec::t_shaped(*n),
            GraphConfig::Linear { n } => GraphSpec::linear(*n),
            GraphConfig::Custom { n, edges } => GraphSpec::new(*n, edges.iter().copied()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingConfig {
    pub events_per_setting: f64,
    pub tomography_rate: f64,
    pub duration_s: f64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        Self {
            events_per_setting: DEFAULT_EVENTS_PER_SETTING,
            tomography_rate: calibrated_tomography_rate(),
            duration_s: DEFAULT_DURATION_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

fn default_max_product() -> usize {
    DEFAULT_MAX_PRODUCT_SIZE
}

fn default_replicas() -> usize {
    DEFAULT_BOOTSTRAP_REPLICAS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub graph: GraphConfig,
    pub support: Vec<usize>,
    #[serde(default = "default_max_product")]
    pub max_product_size: usize,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub counting: CountingConfig,
    /// Every random stream is derived from this.
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub bootstrap_replicas: usize,
    #[serde(default)]
    pub mle: MleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA.into(),
            graph: GraphConfig::TShaped { n: 7 },
            support: vec![1, 2, 3, 4],
            max_product_size: DEFAULT_MAX_PRODUCT_SIZE,
            noise: NoiseSpec::calibrated(),
            counting: CountingConfig::default(),
            seed: 20080101,
            bootstrap_replicas: DEFAULT_BOOTSTRAP_REPLICAS,
            mle: MleConfig::default(),
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported schema `{}`, expected `{CONFIG_SCHEMA}`",
                self.schema
            )));
        }
        let g = self.graph.build().map_err(|e| Error::Config(e.to_string()))?;
        if self.support.is_empty() {
            return Err(Error::Config("support is empty".into()));
        }
        if let Some(q) = self.support.iter().find(|&&q| q == 0 || q > g.n()) {
            return Err(Error::Config(format!("support qubit {q} is not in the {}-qubit graph", g.n())));
        }
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        let c = &self.counting;
        for (name, v) in [
            ("events_per_setting", c.events_per_setting),
            ("tomography_rate", c.tomography_rate),
            ("duration_s", c.duration_s),
            ("mle.tol", self.mle.tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mle.max_iter == 0 {
            return Err(Error::Config("mle.max_iter must be positive".into()));
        }
        if self.bootstrap_replicas < 100 {
            return Err(Error::Config("bootstrap_replicas must be at least 100".into()));
        }
        Ok(())
    }
}
