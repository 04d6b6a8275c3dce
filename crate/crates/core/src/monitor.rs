//! Post-certification operational monitoring.
//!
//! Each operational window is evaluated independently against the certified
//! baseline for four recertification triggers: performance degradation,
//! dataset shift (total variation strictly above the threshold, default
//! 0.30), environmental change (tags outside the certified envelope) and
//! uncertainty-handling updates.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::stats::{total_variation, total_variation_counts};
use crate::evidence::{DatasetSummary, FeatureKind, UncertaintyConfig};
use crate::metrics::{metric_value, PerformanceMetrics};
use crate::report::AssuranceProfile;

/// One evaluation window of operational evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationalWindow {
    pub window_id: String,
    /// `[start, end]`, start strictly before end.
    pub period: (DateTime<Utc>, DateTime<Utc>),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<PerformanceMetrics>,
    /// Distribution of predicted labels over the window, summing to 1.
    pub prediction_label_dist: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_summary: Option<DatasetSummary>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub environment_tags: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyConfig>,
}

impl OperationalWindow {
    pub fn validate(&self) -> Result<(), MonitorError> {
        if self.period.0 >= self.period.1 {
            return Err(MonitorError::InvalidWindow(format!(
                "window {:?}: start is not before end",
                self.window_id
            )));
        }
        let sum: f64 = self.prediction_label_dist.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MonitorError::InvalidWindow(format!(
                "window {:?}: prediction label distribution sums to {sum}",
                self.window_id
            )));
        }
        Ok(())
    }
}

/// Monitoring thresholds and certified-envelope references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriggerConfig {
    /// Minimum acceptable operational metrics (no built-in defaults).
    pub min_accuracy_metrics: BTreeMap<String, f64>,
    /// Strict total-variation threshold for dataset shift.
    pub drift_threshold: f64,
    /// Environment tags covered by the certification.
    pub baseline_env_tags: BTreeSet<String>,
    pub baseline_uncertainty: Option<UncertaintyConfig>,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            min_accuracy_metrics: BTreeMap::new(),
            drift_threshold: 0.30,
            baseline_env_tags: BTreeSet::new(),
            baseline_uncertainty: None,
        }
    }
}

impl TriggerConfig {
    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    PerformanceDegradation,
    DatasetShift,
    EnvironmentalChange,
    UncertaintyUpdate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiredTrigger {
    pub kind: TriggerKind,
    pub magnitude: f64,
    pub detail: String,
}

/// Outcome of evaluating one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerReport {
    pub window_id: String,
    pub fired: Vec<FiredTrigger>,
    pub recertification_required: bool,
}

/// The certified baseline a monitoring stream compares against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorBaseline {
    pub assurance_profile: AssuranceProfile,
    /// Label distribution at certification time; required for drift triggers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_label_distribution: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_dataset_summary: Option<DatasetSummary>,
}

impl MonitorBaseline {
    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error("baseline carries no reference label distribution")]
    MissingBaseline,
    #[error("windows are not time-ordered at index {0}")]
    UnorderedWindows(usize),
    #[error("invalid operational window: {0}")]
    InvalidWindow(String),
}

/// Largest total-variation distance between the reference dataset summary and
/// the window's, over class counts and per-feature histograms with matching
/// shape.
fn dataset_summary_drift(reference: &DatasetSummary, current: &DatasetSummary) -> f64 {
    let mut worst = total_variation_counts(&reference.class_counts, &current.class_counts);
    for ref_feature in &reference.feature_summaries {
        let Some(cur_feature) =
            current.feature_summaries.iter().find(|f| f.name == ref_feature.name)
        else {
            continue;
        };
        if ref_feature.kind != cur_feature.kind {
            continue;
        }
        let tv = match ref_feature.kind {
            FeatureKind::Numeric => {
                if ref_feature.bin_edges != cur_feature.bin_edges {
                    continue;
                }
                let norm = |counts: &[u64]| -> BTreeMap<String, f64> {
                    counts.iter().enumerate().map(|(i, c)| (i.to_string(), *c as f64)).collect()
                };
                total_variation(&norm(&ref_feature.bin_counts), &norm(&cur_feature.bin_counts))
            }
            FeatureKind::Categorical => {
                total_variation_counts(&ref_feature.category_counts, &cur_feature.category_counts)
            }
        };
        worst = worst.max(tv);
    }
    worst
}

/// Evaluates one window against the baseline. Triggers fire independently;
/// any fired trigger requires recertification.
pub fn evaluate_triggers(
    baseline: &MonitorBaseline,
    window: &OperationalWindow,
    cfg: &TriggerConfig,
) -> Result<TriggerReport, MonitorError> {
    let reference_dist =
        baseline.reference_label_distribution.as_ref().ok_or(MonitorError::MissingBaseline)?;
    window.validate()?;

    let mut fired = Vec::new();

    if let Some(metrics) = &window.metrics {
        let mut worst: Option<(String, f64)> = None;
        for (name, minimum) in &cfg.min_accuracy_metrics {
            let Some(value) = metric_value(metrics, name) else { continue };
            if value < *minimum {
                let shortfall = minimum - value;
                if worst.as_ref().is_none_or(|(_, w)| shortfall > *w) {
                    worst = Some((format!("{name} {value:.4} below minimum {minimum}"), shortfall));
                }
            }
        }
        if let Some((detail, shortfall)) = worst {
            fired.push(FiredTrigger {
                kind: TriggerKind::PerformanceDegradation,
                magnitude: shortfall,
                detail,
            });
        }
    }

    let mut drift = total_variation(reference_dist, &window.prediction_label_dist);
    let mut drift_detail = "prediction label distribution".to_string();
    if let (Some(reference), Some(current)) =
        (&baseline.reference_dataset_summary, &window.dataset_summary)
    {
        let summary_drift = dataset_summary_drift(reference, current);
        if summary_drift > drift {
            drift = summary_drift;
            drift_detail = "operational dataset summary".to_string();
        }
    }
    if drift > cfg.drift_threshold {
        fired.push(FiredTrigger {
            kind: TriggerKind::DatasetShift,
            magnitude: drift,
            detail: format!(
                "{drift_detail} moved by {:.1}% (threshold {:.0}%)",
                drift * 100.0,
                cfg.drift_threshold * 100.0
            ),
        });
    }

    let new_tags: Vec<&String> =
        window.environment_tags.difference(&cfg.baseline_env_tags).collect();
    if !new_tags.is_empty() {
        fired.push(FiredTrigger {
            kind: TriggerKind::EnvironmentalChange,
            magnitude: new_tags.len() as f64,
            detail: format!(
                "tags outside certified envelope: {}",
                new_tags.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")
            ),
        });
    }

    if let (Some(baseline_u), Some(window_u)) = (&cfg.baseline_uncertainty, &window.uncertainty) {
        let mut changed = Vec::new();
        if baseline_u.confidence_threshold != window_u.confidence_threshold {
            changed.push("confidence_threshold");
        }
        if baseline_u.ambiguous_band != window_u.ambiguous_band {
            changed.push("ambiguous_band");
        }
        if baseline_u.failsafe_policy != window_u.failsafe_policy {
            changed.push("failsafe_policy");
        }
        if !changed.is_empty() {
            fired.push(FiredTrigger {
                kind: TriggerKind::UncertaintyUpdate,
                magnitude: changed.len() as f64,
                detail: format!("uncertainty handling changed: {}", changed.join(", ")),
            });
        }
    }

    let recertification_required = !fired.is_empty();
    Ok(TriggerReport { window_id: window.window_id.clone(), fired, recertification_required })
}

/// Evaluates a time-ordered stream of windows. Windows are independent; an
/// earlier firing never suppresses later evaluation. Reports come back in
/// input order.
pub fn monitor_stream(
    baseline: &MonitorBaseline,
    windows: &[OperationalWindow],
    cfg: &TriggerConfig,
) -> Result<Vec<TriggerReport>, MonitorError> {
    for (i, pair) in windows.windows(2).enumerate() {
        if pair[0].period.0 > pair[1].period.0 {
            return Err(MonitorError::UnorderedWindows(i + 1));
        }
    }
    windows
        .par_iter()
        .map(|w| evaluate_triggers(baseline, w, cfg))
        .collect()
}

/// Loads windows from a file holding a single window object, an array of
/// windows, or newline-delimited window documents.
pub fn load_windows(path: &Path) -> Result<Vec<OperationalWindow>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    let invalid = |e: serde_json::Error| {
        std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
    };
    if let Ok(window) = serde_json::from_str::<OperationalWindow>(&text) {
        return Ok(vec![window]);
    }
    if let Ok(windows) = serde_json::from_str::<Vec<OperationalWindow>>(&text) {
        return Ok(windows);
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| serde_json::from_str::<OperationalWindow>(line).map_err(invalid))
        .collect()
}
