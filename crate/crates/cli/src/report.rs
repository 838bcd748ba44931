//! JSON report types and the plot-data CSV.

use std::io::Write;

use serde::{Serialize, Serializer};
use sitscreen::simlab::SimulationReport;
use sitscreen::{ActiveSet, Dataset, ScreeningResult, ThresholdRule, VarianceCalibration};

use crate::config::{KeepArg, ScreenConfig};
use crate::error::Result;

/// Bumped on any breaking change to a report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A threshold that may be infinite; encoded as a JSON number or the strings
/// `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold(pub f64);

impl Threshold {
    pub fn text(self) -> String {
        match self.0 {
            v if v == f64::INFINITY => "inf".into(),
            v if v == f64::NEG_INFINITY => "-inf".into(),
            v => v.to_string(),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.text())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateRecord {
    pub rank: usize,
    pub index: usize,
    pub name: String,
    pub omega: f64,
    pub z: f64,
    pub p_value: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScreenReport {
    pub schema_version: u32,
    pub config: ScreenConfig,
    pub n: usize,
    pub p: usize,
    pub n_effective: usize,
    pub slice_size: usize,
    pub slice_count: usize,
    pub calibration: VarianceCalibration,
    pub rule: ThresholdRule,
    pub realized_threshold: Threshold,
    /// The harmonic constant for `by`, 1 for `bh`, absent for hard rules.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_constant: Option<f64>,
    pub num_selected: usize,
    /// Sorted by rank.
    pub covariates: Vec<CovariateRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ScreenReport {
    pub fn build(
        config: ScreenConfig,
        data: &Dataset,
        result: &ScreeningResult,
        active: &ActiveSet,
    ) -> Self {
        let ranks = result.ranks();
        let covariates = result
            .order
            .iter()
            .map(|&k| CovariateRecord {
                rank: ranks[k],
                index: k,
                name: data.name(k),
                omega: result.omega[k],
                z: result.z[k],
                p_value: result.p_values[k],
                selected: active.contains(k),
            })
            .collect();
        let harmonic_constant = config
            .rule
            .fdr_config()
            .and_then(|c| c.ok())
            .map(|c| c.constant(result.p()));
        Self {
            schema_version: SCHEMA_VERSION,
            n: data.n(),
            p: data.p(),
            n_effective: result.n_effective,
            slice_size: result.config.c,
            slice_count: result.n_effective / result.config.c,
            calibration: result.calibration,
            rule: config.rule,
            realized_threshold: Threshold(active.realized_threshold),
            harmonic_constant,
            num_selected: active.len(),
            covariates,
            timing: None,
            config,
        }
    }

    /// Indices of the selected covariates, ascending.
    pub fn selected(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .covariates
            .iter()
            .filter(|c| c.selected)
            .map(|c| c.index)
            .collect();
        out.sort_unstable();
        out
    }

    /// Writes one `index,name,omega,selected` row per covariate in column
    /// order, then `THRESHOLD,,<value>,`.
    pub fn write_plot_data<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["index", "name", "omega", "selected"])?;
        let mut rows: Vec<&CovariateRecord> = self.covariates.iter().collect();
        rows.sort_by_key(|c| c.index);
        for c in rows {
            w.write_record([
                c.index.to_string(),
                c.name.clone(),
                c.omega.to_string(),
                c.selected.to_string(),
            ])?;
        }
        w.write_record(["THRESHOLD", "", &self.realized_threshold.text(), ""])?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    #[serde(flatten)]
    pub report: SimulationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AugmentReport {
    pub schema_version: u32,
    pub keep: KeepArg,
    pub num_aux: usize,
    /// Original column indices carried into the augmented data, in order;
    /// they occupy its first columns.
    pub kept: Vec<usize>,
    pub original: ScreenReport,
    pub augmented: ScreenReport,
    /// Original indices selected in both runs.
    pub overlap: Vec<usize>,
    /// Whether every originally selected covariate is selected again.
    pub retained: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
