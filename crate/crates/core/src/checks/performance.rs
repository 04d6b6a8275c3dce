//! Model-performance and perturbation-robustness checks.

use std::collections::BTreeMap;

use crate::classification::CheckCategory;
use crate::config::CheckConfig;
use crate::evidence::{PerturbationCondition, PredictionSet};
use crate::metrics::{evaluate_performance, metric_value, MetricsError, PerformanceMetrics};

use super::{CheckError, CheckResult};

/// Evaluates the baseline prediction set against the configured per-metric
/// minima. The score is the mean of `metric / minimum` ratios capped at 1;
/// the check passes only when every configured metric meets its minimum.
pub fn check_model_performance(
    p: &PredictionSet,
    cfg: &CheckConfig,
) -> Result<CheckResult, CheckError> {
    let metrics = evaluate_performance(p, cfg.iou_threshold).map_err(|e| match e {
        MetricsError::NoGroundTruth => CheckError::NoGroundTruth,
    })?;
    check_metrics_against_thresholds(&metrics, cfg)
}

/// Threshold comparison split out so callers holding precomputed metrics can
/// reuse it.
pub fn check_metrics_against_thresholds(
    metrics: &PerformanceMetrics,
    cfg: &CheckConfig,
) -> Result<CheckResult, CheckError> {
    let mut measurements: BTreeMap<String, f64> = BTreeMap::new();
    measurements.insert("precision".to_string(), metrics.precision);
    measurements.insert("recall".to_string(), metrics.recall);
    measurements.insert("f1".to_string(), metrics.f1);
    measurements.insert("map_50".to_string(), metrics.map_50);

    let mut findings = Vec::new();
    let mut ratios = Vec::new();
    let mut all_met = true;
    for (name, minimum) in &cfg.performance_thresholds {
        let value = metric_value(metrics, name)
            .ok_or_else(|| CheckError::UnknownMetric(name.clone()))?;
        let ratio = if *minimum <= 0.0 { 1.0 } else { (value / minimum).min(1.0) };
        ratios.push(ratio);
        if value < *minimum {
            all_met = false;
            findings.push(format!("{name} {value:.4} below required minimum {minimum}"));
        }
        measurements.insert(format!("threshold:{name}"), *minimum);
    }
    let score = if ratios.is_empty() {
        1.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    Ok(CheckResult::with_passed(
        "model_performance",
        CheckCategory::ModelPerformance,
        score,
        all_met,
        1.0,
        findings,
        measurements,
    ))
}

/// Compares the worst relative mAP degradation across perturbed runs against
/// the tolerance. The score decays linearly, reaching zero at twice the
/// tolerance, so passing degradations sit at 0.5 or above.
pub fn check_robustness(
    baseline: &PerformanceMetrics,
    perturbed: &[(PerturbationCondition, PerformanceMetrics)],
    tolerance: f64,
) -> Result<CheckResult, CheckError> {
    if perturbed.is_empty() {
        return Err(CheckError::NoPerturbedRuns);
    }
    if baseline.map_50 <= 0.0 {
        return Err(CheckError::ZeroBaseline);
    }

    let mut measurements: BTreeMap<String, f64> = BTreeMap::new();
    measurements.insert("baseline_map_50".to_string(), baseline.map_50);
    measurements.insert("tolerance".to_string(), tolerance);

    let mut worst: Option<(&PerturbationCondition, f64)> = None;
    for (condition, metrics) in perturbed {
        let degradation = (baseline.map_50 - metrics.map_50) / baseline.map_50;
        measurements.insert(format!("degradation:{condition}"), degradation);
        if worst.is_none_or(|(_, w)| degradation > w) {
            worst = Some((condition, degradation));
        }
    }
    let (worst_condition, worst_degradation) = worst.expect("perturbed is nonempty");
    measurements.insert("worst_degradation".to_string(), worst_degradation);

    let score = (1.0 - worst_degradation / (2.0 * tolerance)).clamp(0.0, 1.0);
    let mut findings = Vec::new();
    if worst_degradation > 0.0 {
        findings.push(format!(
            "worst mAP degradation {:.1}% under {worst_condition}",
            worst_degradation * 100.0
        ));
    }
    Ok(CheckResult::scored(
        "robustness",
        CheckCategory::ModelPerformance,
        score,
        0.5,
        findings,
        measurements,
    ))
}
