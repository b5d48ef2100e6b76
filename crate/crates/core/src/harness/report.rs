use super::{HarnessError, Metrics};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub x: Vec<f64>,
    pub nu: f64,
    pub lambda: f64,
}

/// Serialised summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub estimator: String,
    /// Every option in force, defaults included.
    pub config: serde_json::Value,
    pub estimates: Estimates,
    pub iterations: usize,
    pub converged: bool,
    /// One entry per iteration.
    pub trace: Vec<serde_json::Value>,
    pub metrics: Option<Metrics>,
    pub wall_time_s: f64,
    pub seed: Option<u64>,
}

impl RunReport {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trace.len() != self.iterations {
            return Err(HarnessError::Invalid(format!(
                "trace has {} entries for {} iterations",
                self.trace.len(),
                self.iterations
            )));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        self.validate()?;
        let s = serde_json::to_string_pretty(self).map_err(|e| HarnessError::Json(e.to_string()))?;
        std::fs::write(path, s).map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let s = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&s).map_err(|e| HarnessError::Json(e.to_string()))
    }
}
