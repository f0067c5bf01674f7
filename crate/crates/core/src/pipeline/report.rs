use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::SolverConfig;

/// Slack allowed between the end-to-end time and the sum of its stages, as a
/// fraction of the end-to-end time.
pub const TIMING_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    /// `uniform`, `correlated`, or the path the instance was read from.
    pub source: String,
    pub n: usize,
    pub k: usize,
    pub edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub runs: usize,
    pub weight_vectors: usize,
    pub weight_resolution: usize,
    pub pool_size: usize,
    pub distinct_samples: usize,
}

/// Wall-clock seconds per stage, from a monotonic clock.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    /// Instance load or generation, scalarization and block assembly.
    pub model_construction_s: f64,
    /// Integration and spin readout.
    pub sampling_s: f64,
    /// Objective evaluation, deduplication, non-dominated sort and HV.
    pub pareto_filtering_s: f64,
    pub end_to_end_s: f64,
}

impl StageTimings {
    pub fn stage_sum(&self) -> f64 {
        self.model_construction_s + self.sampling_s + self.pareto_filtering_s
    }

    /// `end_to_end ≥ stage sum − slack`, all stages non-negative.
    pub fn decomposition_holds(&self) -> bool {
        let stages = [
            self.model_construction_s,
            self.sampling_s,
            self.pareto_filtering_s,
        ];
        stages.iter().all(|&s| s >= 0.0 && s.is_finite())
            && self.end_to_end_s >= self.stage_sum() - TIMING_SLACK * self.end_to_end_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontInfo {
    pub archive_size: usize,
    /// Pool size divided by archive size.
    pub samples_per_pareto_point: f64,
    pub reference_mode: String,
    pub reference: Vec<f64>,
    /// Archive entries left out of the HV because they do not dominate the reference point.
    pub clipped_entries: usize,
    pub hv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hv_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hv_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hv_difference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_front_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_points_found: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_to_optimal_hv: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceInfo,
    pub solver: SolverConfig,
    pub sampling: SamplingInfo,
    pub timings: StageTimings,
    pub front: FrontInfo,
}

impl RunReport {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::usage(format!("cannot serialize report: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| {
                text[..s.start.min(text.len())].matches('\n').count() + 1
            });
            Error::parse(line, e.message().to_string())
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The report with all timings zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: StageTimings::default(),
            ..self.clone()
        }
    }
}
