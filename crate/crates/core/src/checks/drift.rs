//! Train/test drift checks: per-feature PSI or total variation, plus label
//! distribution drift.

use std::collections::BTreeMap;

use crate::classification::CheckCategory;
use crate::config::CheckConfig;
use crate::evidence::{DatasetSummary, FeatureKind};

use super::{stats, CheckError, CheckResult};

/// Compares train and test summaries feature by feature (PSI for numeric,
/// total variation for categorical) and emits one check for feature drift and
/// one for label-distribution drift.
pub fn check_train_test_drift(
    train: &DatasetSummary,
    test: &DatasetSummary,
    cfg: &CheckConfig,
) -> Result<Vec<CheckResult>, CheckError> {
    let mut feature_scores = Vec::new();
    let mut measurements = BTreeMap::new();
    let mut findings = Vec::new();
    let mut worst: Option<(String, f64)> = None;

    for train_feature in &train.feature_summaries {
        let Some(test_feature) =
            test.feature_summaries.iter().find(|f| f.name == train_feature.name)
        else {
            continue;
        };
        let (stat, stat_max, stat_name) = match train_feature.kind {
            FeatureKind::Numeric => {
                (stats::psi(train_feature, test_feature, cfg.epsilon)?, cfg.psi_max, "psi")
            }
            FeatureKind::Categorical => {
                if test_feature.kind != FeatureKind::Categorical {
                    return Err(CheckError::BinMismatch {
                        feature: train_feature.name.clone(),
                        detail: "feature kinds differ".to_string(),
                    });
                }
                let tv = stats::total_variation_counts(
                    &train_feature.category_counts,
                    &test_feature.category_counts,
                );
                (tv, cfg.tv_max, "tv")
            }
        };
        measurements.insert(format!("{stat_name}:{}", train_feature.name), stat);
        let score = (1.0 - stat / stat_max).clamp(0.0, 1.0);
        if worst.as_ref().is_none_or(|(_, s)| score < *s) {
            worst = Some((train_feature.name.clone(), score));
        }
        feature_scores.push(score);
    }

    if feature_scores.is_empty() {
        return Err(CheckError::NoSharedFeatures);
    }
    if let Some((name, score)) = &worst {
        if *score < 1.0 {
            findings.push(format!("feature {name:?} drifts most between train and test"));
        }
    }
    let feature_score = feature_scores.iter().sum::<f64>() / feature_scores.len() as f64;
    let feature_check = CheckResult::scored(
        "feature_drift",
        CheckCategory::TrainTest,
        feature_score,
        cfg.thresholds.feature_drift.pass_threshold,
        findings,
        measurements,
    );

    let label_tv = stats::total_variation_counts(&train.class_counts, &test.class_counts);
    let label_score = (1.0 - label_tv / cfg.tv_max).clamp(0.0, 1.0);
    let mut label_findings = Vec::new();
    if label_score < 1.0 {
        label_findings.push(format!(
            "class distribution moved by {:.1}% between train and test",
            label_tv * 100.0
        ));
    }
    let label_check = CheckResult::scored(
        "label_distribution_drift",
        CheckCategory::TrainTest,
        label_score,
        cfg.thresholds.label_distribution_drift.pass_threshold,
        label_findings,
        [("label_tv".to_string(), label_tv)].into_iter().collect(),
    );

    Ok(vec![feature_check, label_check])
}
