//! Result records and their JSON and CSV forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::mcmc::{Estimate, GibbsParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One parameter cell. Only finite values are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub index: usize,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub tainted: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CellRecord {
    pub fn new(index: usize, seed: u64, params: &GibbsParams) -> Self {
        let mut p = BTreeMap::new();
        p.insert("beta".into(), params.beta);
        p.insert("gamma".into(), params.gamma);
        p.insert("length".into(), params.length);
        p.insert("points".into(), params.points as f64);
        Self {
            index,
            seed,
            params: p,
            values: BTreeMap::new(),
            error: None,
            tainted: false,
            warnings: Vec::new(),
        }
    }

    pub fn failed(mut self, error: impl ToString) -> Self {
        self.error = Some(error.to_string());
        self
    }

    pub fn set(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.values.insert(key.into(), value);
        }
    }

    /// Stores `key` and `key_se`.
    pub fn set_estimate(&mut self, key: &str, e: &Estimate) {
        self.set(key, e.mean);
        self.set(format!("{key}_se"), e.std_error);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn estimate(&self, key: &str) -> Option<Estimate> {
        Some(Estimate {
            mean: self.get(key)?,
            std_error: self.get(&format!("{key}_se"))?,
            ess: f64::NAN,
            samples: 0,
        })
    }

    pub fn param(&self, key: &str) -> f64 {
        self.params[key]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: ExperimentKind,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub cells: Vec<CellRecord>,
    pub summary: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub tainted: bool,
}

impl ResultRecord {
    pub fn new(config: &ExperimentConfig, cells: Vec<CellRecord>) -> Self {
        let tainted = cells.iter().any(|c| c.tainted);
        Self {
            experiment: config.experiment,
            version: VERSION.to_string(),
            seed: config.seed,
            config: config.clone(),
            cells,
            summary: BTreeMap::new(),
            warnings: Vec::new(),
            tainted,
        }
    }

    pub fn add_summary(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.summary.insert(key.into(), value);
        }
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// One row per cell, with `#` comment lines carrying the version,
    /// seed, resolved configuration, summary and warnings. Floats use 17
    /// significant digits; lines end in LF.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        let mut comment = |line: &str| {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        };
        comment(&format!("nlsgibbs {}", self.version));
        comment(&format!("experiment = {}", self.experiment.name()));
        comment(&format!("seed = {}", self.seed));
        comment("config:");
        for line in self.config.to_toml_string()?.lines() {
            comment(&format!("  {line}"));
        }
        for (k, v) in &self.summary {
            comment(&format!("summary {k} = {}", fmt_float(*v)));
        }
        for w in &self.warnings {
            comment(&format!("warning: {w}"));
        }
        for c in &self.cells {
            if let Some(e) = &c.error {
                comment(&format!("cell {} error: {e}", c.index));
            }
            for w in &c.warnings {
                comment(&format!("cell {} warning: {w}", c.index));
            }
        }

        let params: BTreeSet<&String> = self.cells.iter().flat_map(|c| c.params.keys()).collect();
        let values: BTreeSet<&String> = self.cells.iter().flat_map(|c| c.values.keys()).collect();
        let mut header = vec!["cell".to_string(), "seed".into(), "status".into(), "tainted".into()];
        header.extend(params.iter().map(|s| s.to_string()));
        header.extend(values.iter().map(|s| s.to_string()));
        out.push_str(&header.join(","));
        out.push('\n');
        for c in &self.cells {
            let status = if c.error.is_some() { "error" } else { "ok" };
            let mut row = format!("{},{},{},{}", c.index, c.seed, status, c.tainted as u8);
            for k in &params {
                row.push(',');
                if let Some(v) = c.params.get(*k) {
                    write!(row, "{}", fmt_float(*v)).expect("string write");
                }
            }
            for k in &values {
                row.push(',');
                if let Some(v) = c.values.get(*k) {
                    write!(row, "{}", fmt_float(*v)).expect("string write");
                }
            }
            out.push_str(&row);
            out.push('\n');
        }
        Ok(out)
    }
}

/// 17 significant digits, '.' decimal separator.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact label for a number inside a key, e.g. `0.5` or `16`.
pub(crate) fn label(v: f64) -> String {
    format!("{v}")
}
