//! The automated check suite: four evaluation categories scored 0-1 and
//! aggregated into a criticality-weighted suite score.
//!
//! Categories without the evidence they need are excluded and the remaining
//! category weights renormalized, so "not assessed" stays distinguishable
//! from "assessed and failed". Checks are independent pure functions;
//! the suite may run categories in parallel but always aggregates in the
//! fixed category order, so reports are identical regardless of scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classification::{
    required_validation_level, CheckCategory, Classification, ValidationLevel,
};
use crate::config::CheckConfig;
use crate::evidence::{validate_evidence_coverage, CoverageEntry, EvidenceBundle};
use crate::metrics::{evaluate_performance, PerformanceMetrics};
use crate::weights::WeightProfile;

pub mod drift;
pub mod integrity;
pub mod performance;
pub mod resource;
pub mod stats;

pub use drift::check_train_test_drift;
pub use integrity::check_dataset_integrity;
pub use performance::{check_metrics_against_thresholds, check_model_performance, check_robustness};
pub use resource::check_resource_utilization;
pub use stats::{psi, total_variation, total_variation_counts};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("dataset summary has no samples")]
    EmptyDataset,
    #[error("train and test summaries share no features")]
    NoSharedFeatures,
    #[error("bin mismatch on feature {feature:?}: {detail}")]
    BinMismatch { feature: String, detail: String },
    #[error("prediction set has no ground truth")]
    NoGroundTruth,
    #[error("no perturbed prediction runs supplied")]
    NoPerturbedRuns,
    #[error("baseline mAP is zero; degradation undefined")]
    ZeroBaseline,
    #[error("resource samples contain no latency measurements")]
    EmptySamples,
    #[error("no check category has the evidence it needs")]
    NothingAssessable,
    #[error("unknown performance metric {0:?} in configuration")]
    UnknownMetric(String),
}

/// Outcome of one automated check.
///
/// `passed` always agrees with `score >= measurements["pass_threshold"]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub category: CheckCategory,
    pub score: f64,
    pub passed: bool,
    pub findings: Vec<String>,
    pub measurements: BTreeMap<String, f64>,
}

impl CheckResult {
    /// Builds a result whose pass/fail is derived from the score threshold.
    pub(crate) fn scored(
        check_id: &str,
        category: CheckCategory,
        score: f64,
        pass_threshold: f64,
        findings: Vec<String>,
        measurements: BTreeMap<String, f64>,
    ) -> Self {
        let passed = score >= pass_threshold;
        Self::with_passed(check_id, category, score, passed, pass_threshold, findings, measurements)
    }

    /// Builds a result with an explicitly computed pass/fail outcome.
    pub(crate) fn with_passed(
        check_id: &str,
        category: CheckCategory,
        score: f64,
        passed: bool,
        pass_threshold: f64,
        findings: Vec<String>,
        mut measurements: BTreeMap<String, f64>,
    ) -> Self {
        measurements.insert("pass_threshold".to_string(), pass_threshold);
        CheckResult {
            check_id: check_id.to_string(),
            category,
            score: score.clamp(0.0, 1.0),
            passed,
            findings,
            measurements,
        }
    }
}

/// Mean-scored outcome of one assessed category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub category: CheckCategory,
    pub score: f64,
    pub assessed: bool,
    pub check_results: Vec<CheckResult>,
}

/// Aggregated result of a full suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSuiteReport {
    /// Assessed categories in fixed order.
    pub category_scores: Vec<CategoryScore>,
    /// Renormalized weights actually applied (sum to 1 over assessed categories).
    pub category_weights: BTreeMap<CheckCategory, f64>,
    /// `100 x sum(weight x category score)`, in [0, 100].
    pub suite_score: f64,
    /// Passed checks over executed checks.
    pub auto_pass_fraction: f64,
    pub validation_level: ValidationLevel,
    /// Assessability of all four categories, including excluded ones.
    pub coverage: Vec<CoverageEntry>,
}

fn run_category(
    bundle: &EvidenceBundle,
    level: ValidationLevel,
    cfg: &CheckConfig,
    category: CheckCategory,
) -> Result<Vec<CheckResult>, CheckError> {
    match category {
        CheckCategory::DataIntegrity => {
            let summary = bundle.integrity_summary().ok_or(CheckError::EmptyDataset)?;
            integrity::check_dataset_integrity(summary, cfg)
        }
        CheckCategory::TrainTest => {
            let train = bundle
                .summary_for(crate::evidence::DatasetSplit::Train)
                .ok_or(CheckError::NoSharedFeatures)?;
            let test = bundle
                .summary_for(crate::evidence::DatasetSplit::Test)
                .ok_or(CheckError::NoSharedFeatures)?;
            drift::check_train_test_drift(train, test, cfg)
        }
        CheckCategory::ModelPerformance => {
            let baseline = bundle.baseline_predictions().ok_or(CheckError::NoGroundTruth)?;
            let metrics = evaluate_performance(baseline, cfg.iou_threshold)
                .map_err(|_| CheckError::NoGroundTruth)?;
            let mut checks = vec![performance::check_metrics_against_thresholds(&metrics, cfg)?];
            if level.runs_robustness_checks() && metrics.map_50 > 0.0 {
                let perturbed: Vec<(crate::evidence::PerturbationCondition, PerformanceMetrics)> =
                    bundle
                        .perturbed_predictions()
                        .into_iter()
                        .filter(|p| !p.ground_truth.is_empty())
                        .map(|p| {
                            evaluate_performance(p, cfg.iou_threshold)
                                .map(|m| (p.condition.clone(), m))
                        })
                        .collect::<Result<_, _>>()
                        .map_err(|_| CheckError::NoGroundTruth)?;
                if !perturbed.is_empty() {
                    checks.push(performance::check_robustness(
                        &metrics,
                        &perturbed,
                        cfg.robustness_tolerance,
                    )?);
                }
            }
            Ok(checks)
        }
        CheckCategory::Resource => {
            let samples = bundle.resource_samples.as_ref().ok_or(CheckError::EmptySamples)?;
            resource::check_resource_utilization(samples, &cfg.resource_limits).map(|c| vec![c])
        }
    }
}

/// Runs every category the bundle has evidence for, gated by the
/// classification's validation level, and aggregates the weighted suite score.
pub fn run_check_suite(
    bundle: &EvidenceBundle,
    c: &Classification,
    profile: &WeightProfile,
    cfg: &CheckConfig,
) -> Result<CheckSuiteReport, CheckError> {
    let level = required_validation_level(c);
    let coverage = validate_evidence_coverage(bundle, level);
    let assessable: Vec<CheckCategory> =
        coverage.iter().filter(|e| e.assessable).map(|e| e.category).collect();
    if assessable.is_empty() {
        return Err(CheckError::NothingAssessable);
    }

    // Parallel execution; indexed collect keeps the fixed category order.
    let per_category: Vec<Result<Vec<CheckResult>, CheckError>> = assessable
        .par_iter()
        .map(|cat| run_category(bundle, level, cfg, *cat))
        .collect();

    let mut category_scores = Vec::with_capacity(assessable.len());
    for (cat, result) in assessable.iter().zip(per_category) {
        let checks = result?;
        let score = checks.iter().map(|c| c.score).sum::<f64>() / checks.len() as f64;
        category_scores.push(CategoryScore {
            category: *cat,
            score,
            assessed: true,
            check_results: checks,
        });
    }

    let raw_weight: f64 = assessable.iter().map(|cat| profile.category_weights[cat]).sum();
    let category_weights: BTreeMap<CheckCategory, f64> =
        assessable.iter().map(|cat| (*cat, profile.category_weights[cat] / raw_weight)).collect();

    let suite_score: f64 = 100.0
        * category_scores
            .iter()
            .map(|cs| category_weights[&cs.category] * cs.score)
            .sum::<f64>();
    let executed: usize = category_scores.iter().map(|cs| cs.check_results.len()).sum();
    let passed: usize =
        category_scores.iter().flat_map(|cs| &cs.check_results).filter(|c| c.passed).count();

    Ok(CheckSuiteReport {
        category_scores,
        category_weights,
        suite_score: suite_score.clamp(0.0, 100.0),
        auto_pass_fraction: passed as f64 / executed as f64,
        validation_level: level,
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::parse_classification;
    use crate::weights::{resolve_weight_profile, WeightRegistry};

    fn profile_for(text: &str) -> (Classification, WeightProfile) {
        let c = parse_classification(text).unwrap();
        let p = resolve_weight_profile(&c, &WeightRegistry::builtin()).unwrap();
        (c, p)
    }

    #[test]
    fn empty_bundle_has_nothing_assessable() {
        let bundle = crate::fixtures::empty_bundle("D/2A/3");
        let (c, profile) = profile_for("D/2A/3");
        assert!(matches!(
            run_check_suite(&bundle, &c, &profile, &CheckConfig::default()),
            Err(CheckError::NothingAssessable)
        ));
    }

    #[test]
    fn full_bundle_assesses_all_four_categories() {
        let bundle = crate::fixtures::full_bundle();
        let (c, profile) = profile_for("D/2A/3");
        let report = run_check_suite(&bundle, &c, &profile, &CheckConfig::default()).unwrap();
        assert_eq!(report.category_scores.len(), 4);
        assert_eq!(report.validation_level, ValidationLevel::V3);
        let weights: Vec<f64> = CheckCategory::ALL
            .iter()
            .map(|cat| report.category_weights[cat])
            .collect();
        assert_eq!(weights, vec![0.25, 0.20, 0.30, 0.25]);
        assert!(report.suite_score > 0.0 && report.suite_score <= 100.0);
        // Robustness runs at V3 with perturbed sets present.
        let perf = report
            .category_scores
            .iter()
            .find(|cs| cs.category == CheckCategory::ModelPerformance)
            .unwrap();
        assert_eq!(perf.check_results.len(), 2);
    }

    #[test]
    fn missing_resources_renormalizes_weights() {
        let mut bundle = crate::fixtures::full_bundle();
        bundle.resource_samples = None;
        let (c, profile) = profile_for("D/2A/3");
        let report = run_check_suite(&bundle, &c, &profile, &CheckConfig::default()).unwrap();
        assert_eq!(report.category_scores.len(), 3);
        let sum: f64 = report.category_weights.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!((report.category_weights[&CheckCategory::DataIntegrity] - 0.25 / 0.75).abs() < 1e-12);
        assert!((report.category_weights[&CheckCategory::TrainTest] - 0.20 / 0.75).abs() < 1e-12);
        assert!(
            (report.category_weights[&CheckCategory::ModelPerformance] - 0.30 / 0.75).abs() < 1e-12
        );
    }

    #[test]
    fn v1_gates_drift_and_robustness() {
        let bundle = crate::fixtures::full_bundle();
        let (_, profile) = profile_for("D/2A/3");
        let c1 = parse_classification("D/2A/1").unwrap();
        let report = run_check_suite(&bundle, &c1, &profile, &CheckConfig::default()).unwrap();
        let categories: Vec<CheckCategory> =
            report.category_scores.iter().map(|cs| cs.category).collect();
        assert!(!categories.contains(&CheckCategory::TrainTest));
        let perf = report
            .category_scores
            .iter()
            .find(|cs| cs.category == CheckCategory::ModelPerformance)
            .unwrap();
        assert_eq!(perf.check_results.len(), 1, "robustness gated below V3");
    }

    #[test]
    fn check_gating_is_monotone_v1_v2_v3() {
        let bundle = crate::fixtures::full_bundle();
        let (_, profile) = profile_for("D/2A/3");
        let cfg = CheckConfig::default();
        let ids = |complexity: &str| -> Vec<String> {
            let c = parse_classification(&format!("D/2A/{complexity}")).unwrap();
            let report = run_check_suite(&bundle, &c, &profile, &cfg).unwrap();
            report
                .category_scores
                .iter()
                .flat_map(|cs| cs.check_results.iter().map(|r| r.check_id.clone()))
                .collect()
        };
        let v1 = ids("1");
        let v2 = ids("2");
        let v3 = ids("3");
        assert!(v1.iter().all(|id| v2.contains(id)), "V1 ⊆ V2");
        assert!(v2.iter().all(|id| v3.contains(id)), "V2 ⊆ V3");
        assert!(v3.len() > v2.len() && v2.len() > v1.len());
    }

    #[test]
    fn all_perfect_bundle_scores_one_hundred() {
        // Build evidence where every check lands on 1.0: balanced complete
        // dataset, identical train/test, a perfect detector, no degradation
        // under perturbation, resources well inside limits.
        let mut bundle = crate::fixtures::empty_bundle("D/2A/3");
        let mut train = crate::fixtures::train_summary();
        train.missing_label_count = 0;
        // Pull the long-tail mass inward so no bin sits outside the fences.
        for feature in &mut train.feature_summaries {
            if feature.name == "bbox_area" {
                feature.bin_counts = vec![60, 120, 120, 80, 20];
                feature.bin_edges = vec![0.0, 500.0, 1000.0, 1500.0, 2000.0, 2500.0];
            }
        }
        let mut test = train.clone();
        test.split = crate::evidence::DatasetSplit::Test;
        bundle.dataset_summaries = vec![train, test];

        let perfect_plan = vec![
            crate::fixtures::ClassPlan { label: "tank", gt_count: 20, tp_count: 20, fp_count: 0 },
            crate::fixtures::ClassPlan { label: "truck", gt_count: 10, tp_count: 10, fp_count: 0 },
        ];
        let baseline = crate::fixtures::prediction_set(
            "perfect-baseline",
            crate::evidence::PerturbationCondition::Baseline,
            &perfect_plan,
        );
        let mut noisy = crate::fixtures::prediction_set(
            "perfect-noise",
            crate::evidence::PerturbationCondition::Noise,
            &perfect_plan,
        );
        noisy.run_id = "perfect-noise".to_string();
        bundle.prediction_sets = vec![baseline, noisy];
        bundle.resource_samples = Some(crate::evidence::ResourceSamples {
            latency_ms: vec![10.0; 30],
            peak_memory_mb: 100.0,
            platform: "bench".to_string(),
        });
        bundle.bundle_checksum = Some(bundle.compute_checksum());

        let (c, profile) = profile_for("D/2A/3");
        let report = run_check_suite(&bundle, &c, &profile, &CheckConfig::default()).unwrap();
        assert_eq!(report.suite_score, 100.0);
        assert_eq!(report.auto_pass_fraction, 1.0);
        for cs in &report.category_scores {
            assert_eq!(cs.score, 1.0, "{:?}", cs.category);
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let bundle = crate::fixtures::full_bundle();
        let (c, profile) = profile_for("D/2A/3");
        let cfg = CheckConfig::default();
        let a = run_check_suite(&bundle, &c, &profile, &cfg).unwrap();
        let b = run_check_suite(&bundle, &c, &profile, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            crate::canonical::to_canonical_json(&a).unwrap(),
            crate::canonical::to_canonical_json(&b).unwrap()
        );
    }
}
