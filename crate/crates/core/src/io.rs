//! On-disk artifact formats. JSON for structured results, CSV for plot data.
//! Every JSON artifact carries `format_version`.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optimize::{OptimizerConfig, RestartSummary, TrainingResult};
use crate::pricing::PayoffReport;
use crate::target::{Domain, Provenance, TargetDistribution};
use crate::walk::SsqwParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetFile {
    pub format_version: u32,
    pub n_bins: usize,
    pub lo: f64,
    pub hi: f64,
    pub probs: Vec<f64>,
    pub bin_edges: Vec<f64>,
    pub provenance: Provenance,
}

impl From<&TargetDistribution> for TargetFile {
    fn from(t: &TargetDistribution) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            n_bins: t.n_bins(),
            lo: t.domain.lo,
            hi: t.domain.hi,
            probs: t.probs.clone(),
            bin_edges: t.bin_edges.clone(),
            provenance: t.provenance.clone(),
        }
    }
}

impl TryFrom<TargetFile> for TargetDistribution {
    type Error = Error;

    fn try_from(f: TargetFile) -> Result<Self> {
        check_version(f.format_version)?;
        if f.n_bins != f.probs.len() {
            return Err(invalid(format!(
                "n_bins = {} but {} probabilities",
                f.n_bins,
                f.probs.len()
            )));
        }
        let t = TargetDistribution {
            probs: f.probs,
            domain: Domain::new(f.lo, f.hi)?,
            bin_edges: f.bin_edges,
            provenance: f.provenance,
        };
        t.validate()?;
        Ok(t)
    }
}

/// Serialized [`TrainingResult`] plus the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingFile {
    pub format_version: u32,
    /// Angles wrapped to `[0, 2π)`.
    pub params: SsqwParams,
    pub params_unwrapped: SsqwParams,
    pub best_mse: f64,
    pub history: Vec<f64>,
    pub trained_dist: Vec<f64>,
    pub iterations_used: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub config: OptimizerConfig,
    pub metadata: Provenance,
}

impl TrainingFile {
    pub fn new(result: &TrainingResult, config: &OptimizerConfig, mut metadata: Provenance) -> Self {
        metadata.insert("seed".into(), config.seed.into());
        metadata.insert("mode".into(), result.mode.clone().into());
        metadata.insert("optimizer".into(), result.optimizer.clone().into());
        metadata.insert("budget_unit".into(), "objective-evaluations".into());
        Self {
            format_version: FORMAT_VERSION,
            params: result.best_params.wrapped(),
            params_unwrapped: result.best_params,
            best_mse: result.best_mse,
            history: result.mse_history.clone(),
            trained_dist: result.trained_dist.clone(),
            iterations_used: result.iterations_used,
            best_restart: result.best_restart,
            restarts: result.restarts.clone(),
            config: config.clone(),
            metadata,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub report: PayoffReport,
    pub metadata: Provenance,
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {v}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn read_target(path: &Path) -> Result<TargetDistribution> {
    read_json::<TargetFile>(path)?.try_into()
}

pub fn read_training(path: &Path) -> Result<TrainingFile> {
    let f: TrainingFile = read_json(path)?;
    check_version(f.format_version)?;
    Ok(f)
}

/// `bin,p_target,p_trained`.
pub fn training_csv(target: &[f64], trained: &[f64]) -> String {
    let mut s = String::from("bin,p_target,p_trained\n");
    for (i, (t, p)) in target.iter().zip(trained).enumerate() {
        let _ = writeln!(s, "{i},{t},{p}");
    }
    s
}

/// `bin,price,p_target,p_trained,payoff`.
pub fn pricing_csv(report: &PayoffReport, target: &[f64], trained: &[f64]) -> String {
    let mut s = String::from("bin,price,p_target,p_trained,payoff\n");
    for i in 0..report.grid.prices.len() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{}",
            report.grid.prices[i], target[i], trained[i], report.per_bin_payoff[i]
        );
    }
    s
}
