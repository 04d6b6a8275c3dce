//! Check-suite and scoring configuration.
//!
//! Every knob has an embedded default; a JSON config file overrides fields
//! individually. Score maps are linear with clamping: full score at or below
//! `full_score_at`, zero at or above `zero_score_at`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classification::ProcessKind;

/// Linear statistic-to-score map (lower statistic is better).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreMap {
    pub full_score_at: f64,
    pub zero_score_at: f64,
    pub pass_threshold: f64,
}

impl ScoreMap {
    pub fn score(&self, stat: f64) -> f64 {
        if stat <= self.full_score_at {
            1.0
        } else if stat >= self.zero_score_at {
            0.0
        } else {
            (self.zero_score_at - stat) / (self.zero_score_at - self.full_score_at)
        }
    }
}

/// Pass threshold for checks whose score map is fixed (drift checks).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassThreshold {
    pub pass_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckThresholds {
    pub class_balance: ScoreMap,
    pub missing_labels: ScoreMap,
    pub property_outliers: ScoreMap,
    pub label_property_correlation: ScoreMap,
    pub feature_drift: PassThreshold,
    pub label_distribution_drift: PassThreshold,
}

impl Default for CheckThresholds {
    fn default() -> Self {
        CheckThresholds {
            class_balance: ScoreMap { full_score_at: 3.0, zero_score_at: 10.0, pass_threshold: 0.5 },
            missing_labels: ScoreMap { full_score_at: 0.0, zero_score_at: 0.05, pass_threshold: 0.5 },
            property_outliers: ScoreMap { full_score_at: 0.01, zero_score_at: 0.10, pass_threshold: 0.5 },
            label_property_correlation: ScoreMap {
                full_score_at: 0.3,
                zero_score_at: 0.8,
                pass_threshold: 0.5,
            },
            feature_drift: PassThreshold { pass_threshold: 0.5 },
            label_distribution_drift: PassThreshold { pass_threshold: 0.5 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResourceLimits {
    pub latency_p95_ms: f64,
    pub memory_mb: f64,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        ResourceLimits { latency_p95_ms: 50.0, memory_mb: 1024.0 }
    }
}

fn default_performance_thresholds() -> BTreeMap<String, f64> {
    [("precision".to_string(), 0.75), ("recall".to_string(), 0.70), ("map_50".to_string(), 0.75)]
        .into_iter()
        .collect()
}

fn default_iou_threshold() -> f64 {
    0.5
}
fn default_psi_max() -> f64 {
    0.25
}
fn default_tv_max() -> f64 {
    0.30
}
fn default_epsilon() -> f64 {
    1e-4
}
fn default_robustness_tolerance() -> f64 {
    0.10
}
fn default_blend_alpha() -> f64 {
    0.5
}
fn default_auto_component_processes() -> Vec<ProcessKind> {
    vec![ProcessKind::VandV]
}

/// Full engine configuration: check thresholds plus the manual/automated
/// blending policy used when building assurance profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    #[serde(default = "default_iou_threshold")]
    pub iou_threshold: f64,
    #[serde(default = "default_psi_max")]
    pub psi_max: f64,
    #[serde(default = "default_tv_max")]
    pub tv_max: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_robustness_tolerance")]
    pub robustness_tolerance: f64,
    #[serde(default = "default_performance_thresholds")]
    pub performance_thresholds: BTreeMap<String, f64>,
    #[serde(default)]
    pub resource_limits: ResourceLimits,
    #[serde(default)]
    pub thresholds: CheckThresholds,
    /// Weight of the manual score when blending with the automated component.
    #[serde(default = "default_blend_alpha")]
    pub blend_alpha: f64,
    /// Per-activity alpha overrides keyed by activity id.
    #[serde(default)]
    pub blend_alpha_overrides: BTreeMap<String, f64>,
    /// Processes whose activities receive the automated component.
    #[serde(default = "default_auto_component_processes")]
    pub auto_component_processes: Vec<ProcessKind>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes to defaults")
    }
}

impl CheckConfig {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn blend_alpha_for(&self, activity_id: &str) -> f64 {
        *self.blend_alpha_overrides.get(activity_id).unwrap_or(&self.blend_alpha)
    }

    pub fn process_gets_auto_component(&self, process: ProcessKind) -> bool {
        self.auto_component_processes.contains(&process)
    }
}
