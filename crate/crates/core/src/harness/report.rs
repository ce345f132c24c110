use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::stats::KsResult;
use crate::error::Result;

/// What the uncertainty attached to a metric means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uncertainty {
    StandardError,
    /// The metric is a KS distance and the uncertainty its p-value.
    KsPValue,
    /// Exact computation; the uncertainty is a numerical bound.
    NumericalBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub value: f64,
    pub uncertainty: f64,
    pub kind: Uncertainty,
}

impl Metric {
    pub fn se(value: f64, se: f64) -> Self {
        Metric {
            value,
            uncertainty: se,
            kind: Uncertainty::StandardError,
        }
    }

    pub fn ks(r: KsResult) -> Self {
        Metric {
            value: r.distance,
            uncertainty: r.p_value,
            kind: Uncertainty::KsPValue,
        }
    }

    pub fn exact(value: f64, bound: f64) -> Self {
        Metric {
            value,
            uncertainty: bound,
            kind: Uncertainty::NumericalBound,
        }
    }
}

/// Outcome of one pre-registered check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    /// Tolerance key in the config.
    pub tolerance: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub schema_version: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub experiment_id: String,
    pub metrics: BTreeMap<String, Metric>,
    pub criteria: Vec<CriterionResult>,
    pub provenance: Provenance,
}

impl StatReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        StatReport {
            experiment_id: config.experiment_id.clone(),
            metrics: BTreeMap::new(),
            criteria: Vec::new(),
            provenance: Provenance {
                config_hash: config.hash(),
                seed: config.seed,
                schema_version: config.schema_version,
            },
        }
    }

    pub fn metric(&mut self, name: impl Into<String>, m: Metric) {
        self.metrics.insert(name.into(), m);
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, tolerance: &str, detail: impl Into<String>) {
        self.criteria.push(CriterionResult {
            name: name.into(),
            passed,
            tolerance: tolerance.to_string(),
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CriterionResult> {
        self.criteria.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Writes `<dir>/<experiment_id>.json` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.experiment_id));
        std::fs::write(&path, self.to_json())?;
        Ok(path)
    }
}
