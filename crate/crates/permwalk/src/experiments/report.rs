//! Structured experiment reports.
//!
//! Reports are pure functions of the configuration: field order is fixed,
//! maps are sorted, and floats serialize through the shortest round-trip
//! form, so equal configs produce byte-identical files regardless of
//! parallelism. Wall-clock timing is deliberately not part of a report;
//! the CLI logs it to stderr instead.

use super::config::ExperimentConfig;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const REPORT_VERSION: &str = "permwalk-report v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub per_sigma: Vec<SigmaRecord>,
    pub aggregates: Vec<AggregateStat>,
    pub assertions: Vec<AssertionRecord>,
    /// Free-form recorded findings (open-problem probes, witnesses).
    pub notes: Vec<String>,
}

/// Statistics for one sampled permutation at one interval size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaRecord {
    pub n: usize,
    pub sigma_index: u64,
    /// Stream that reproduces this permutation under the master seed.
    pub stream_id: u64,
    pub stats: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One aggregate statistic, tagged with its estimator and sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStat {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub value: f64,
    pub estimator: String,
    pub sample_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssertionKind {
    /// Exact identities and proven bounds; a failure means a bug.
    Hard,
    /// Finite-sample renderings of asymptotic claims.
    Statistical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionRecord {
    pub name: String,
    pub kind: AssertionKind,
    pub passed: bool,
    pub detail: String,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> ExperimentReport {
        ExperimentReport {
            version: REPORT_VERSION.to_string(),
            experiment: config.experiment.clone(),
            config: config.clone(),
            per_sigma: Vec::new(),
            aggregates: Vec::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_aggregate(&mut self, name: &str, n: Option<usize>, value: f64, estimator: &str, sample_size: usize) {
        self.aggregates.push(AggregateStat {
            name: name.to_string(),
            n,
            value,
            estimator: estimator.to_string(),
            sample_size,
        });
    }

    pub fn push_assertion(&mut self, name: &str, kind: AssertionKind, passed: bool, detail: String) {
        self.assertions.push(AssertionRecord {
            name: name.to_string(),
            kind,
            passed,
            detail,
        });
    }

    pub fn aggregate(&self, name: &str, n: Option<usize>) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.name == name && a.n == n)
            .map(|a| a.value)
    }

    pub fn assertion(&self, name: &str) -> Option<&AssertionRecord> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn all_assertions_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Flat per-permutation CSV: one row per (n, sigma), columns are the
    /// sorted union of all recorded statistic names.
    pub fn to_sigma_csv(&self) -> String {
        let mut keys: Vec<&str> = Vec::new();
        for rec in &self.per_sigma {
            for k in rec.stats.keys() {
                if !keys.contains(&k.as_str()) {
                    keys.push(k);
                }
            }
        }
        keys.sort_unstable();
        let mut out = String::new();
        out.push_str(&format!("# {REPORT_VERSION}\n"));
        out.push_str(&format!("# experiment={}\n", self.experiment));
        out.push_str("n,sigma_index,stream_id");
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push_str(",error\n");
        for rec in &self.per_sigma {
            out.push_str(&format!("{},{},{}", rec.n, rec.sigma_index, rec.stream_id));
            for k in &keys {
                out.push(',');
                if let Some(v) = rec.stats.get(*k) {
                    out.push_str(&format!("{v:?}"));
                }
            }
            out.push(',');
            if let Some(e) = &rec.error {
                out.push_str(&e.replace(',', ";"));
            }
            out.push('\n');
        }
        out
    }

    /// Plot-ready aggregate CSV.
    pub fn to_aggregate_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {REPORT_VERSION}\n"));
        out.push_str(&format!("# experiment={}\n", self.experiment));
        out.push_str("name,n,value,estimator,sample_size\n");
        for a in &self.aggregates {
            let n = a.n.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{:?},{},{}\n",
                a.name, n, a.value, a.estimator, a.sample_size
            ));
        }
        out
    }

    /// Writes `<base>.json`, `<base>.csv`, and `<base>_agg.csv`.
    pub fn save(&self, base: &Path) -> Result<()> {
        let stem = base.with_extension("");
        let write = |path: std::path::PathBuf, text: String| -> Result<()> {
            let mut f = std::fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
            Ok(())
        };
        write(stem.with_extension("json"), self.to_json_string()?)?;
        write(stem.with_extension("csv"), self.to_sigma_csv())?;
        let mut agg = stem.into_os_string();
        agg.push("_agg.csv");
        write(agg.into(), self.to_aggregate_csv())?;
        Ok(())
    }
}
