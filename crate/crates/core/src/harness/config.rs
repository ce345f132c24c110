use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Parameters of one experiment run. Grids are optional; a grid that is
/// present must be nonempty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment_id: String,
    pub seed: u64,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    /// Named pass/fail thresholds.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Auxiliary numeric knobs (trim fractions, clock times, ...).
    #[serde(default)]
    pub settings: BTreeMap<String, f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Offspring variance of the Galton-Watson trees in the K-projection run.
    #[serde(default = "default_variance")]
    pub offspring_variance: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_variance() -> f64 {
    1.0
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn new(experiment_id: &str, seed: u64, replicates: usize) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment_id: experiment_id.to_string(),
            seed,
            replicates,
            sizes: None,
            eps_grid: None,
            lambda_grid: None,
            tolerances: BTreeMap::new(),
            settings: BTreeMap::new(),
            output_dir: default_output_dir(),
            offspring_variance: 1.0,
        }
    }

    pub fn with_sizes(mut self, sizes: Vec<usize>) -> Self {
        self.sizes = Some(sizes);
        self
    }

    pub fn with_eps(mut self, eps: Vec<f64>) -> Self {
        self.eps_grid = Some(eps);
        self
    }

    pub fn with_lambdas(mut self, lambdas: Vec<f64>) -> Self {
        self.lambda_grid = Some(lambdas);
        self
    }

    pub fn with_tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn with_setting(mut self, name: &str, value: f64) -> Self {
        self.settings.insert(name.to_string(), value);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.experiment_id.is_empty() {
            return Err(config_err("experiment id is empty"));
        }
        if self.replicates == 0 {
            return Err(config_err("replicate count must be >= 1"));
        }
        if self.sizes.as_ref().is_some_and(|g| g.is_empty())
            || self.eps_grid.as_ref().is_some_and(|g| g.is_empty())
            || self.lambda_grid.as_ref().is_some_and(|g| g.is_empty())
        {
            return Err(config_err("grids must be nonempty"));
        }
        if !(self.offspring_variance > 0.0) {
            return Err(config_err("offspring variance must be positive"));
        }
        if self
            .tolerances
            .values()
            .chain(self.settings.values())
            .any(|v| !v.is_finite())
        {
            return Err(config_err("tolerances and settings must be finite"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("plain data");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn sizes(&self) -> Result<&[usize]> {
        self.sizes
            .as_deref()
            .ok_or_else(|| config_err(format!("{}: missing sizes", self.experiment_id)))
    }

    pub fn eps_grid(&self) -> Result<&[f64]> {
        self.eps_grid
            .as_deref()
            .ok_or_else(|| config_err(format!("{}: missing eps_grid", self.experiment_id)))
    }

    pub fn lambda_grid(&self) -> Result<&[f64]> {
        self.lambda_grid
            .as_deref()
            .ok_or_else(|| config_err(format!("{}: missing lambda_grid", self.experiment_id)))
    }

    pub fn tolerance(&self, name: &str) -> Result<f64> {
        self.tolerances
            .get(name)
            .copied()
            .ok_or_else(|| config_err(format!("{}: missing tolerance {name}", self.experiment_id)))
    }

    pub fn setting(&self, name: &str) -> Result<f64> {
        self.settings
            .get(name)
            .copied()
            .ok_or_else(|| config_err(format!("{}: missing setting {name}", self.experiment_id)))
    }

    /// An integer-valued setting.
    pub fn count(&self, name: &str) -> Result<usize> {
        let v = self.setting(name)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(config_err(format!(
                "{}: setting {name} must be a count, got {v}",
                self.experiment_id
            )));
        }
        Ok(v as usize)
    }
}
