//! Data-integrity checks over a single dataset summary.

use std::collections::BTreeMap;

use crate::config::CheckConfig;
use crate::classification::CheckCategory;
use crate::evidence::{DatasetSummary, FeatureKind};

use super::{stats, CheckError, CheckResult};

/// Runs the four integrity checks: class balance, missing labels, property
/// outliers and label-property correlation.
pub fn check_dataset_integrity(
    d: &DatasetSummary,
    cfg: &CheckConfig,
) -> Result<Vec<CheckResult>, CheckError> {
    if d.sample_count == 0 {
        return Err(CheckError::EmptyDataset);
    }
    Ok(vec![
        class_balance(d, cfg),
        missing_labels(d, cfg),
        property_outliers(d, cfg),
        label_property_correlation(d, cfg),
    ])
}

fn class_balance(d: &DatasetSummary, cfg: &CheckConfig) -> CheckResult {
    let map = cfg.thresholds.class_balance;
    let mut findings = Vec::new();
    let mut measurements = BTreeMap::new();

    let max = d.class_counts.values().max().copied().unwrap_or(0);
    let min = d.class_counts.values().min().copied().unwrap_or(0);
    let (ratio, score) = if d.class_counts.is_empty() {
        findings.push("no class counts present".to_string());
        (f64::INFINITY, 0.0)
    } else if min == 0 {
        findings.push("at least one class has zero samples".to_string());
        (f64::INFINITY, 0.0)
    } else {
        let ratio = max as f64 / min as f64;
        (ratio, map.score(ratio))
    };
    if ratio.is_finite() {
        measurements.insert("imbalance_ratio".to_string(), ratio);
    }
    if score < 1.0 && ratio.is_finite() {
        findings.push(format!("class imbalance ratio {ratio:.2} exceeds {}", map.full_score_at));
    }
    CheckResult::scored("class_balance", CheckCategory::DataIntegrity, score, map.pass_threshold, findings, measurements)
}

fn missing_labels(d: &DatasetSummary, cfg: &CheckConfig) -> CheckResult {
    let map = cfg.thresholds.missing_labels;
    let fraction = d.missing_label_count as f64 / d.sample_count as f64;
    let score = map.score(fraction);
    let mut findings = Vec::new();
    if d.missing_label_count > 0 {
        findings.push(format!(
            "{} of {} samples have missing labels ({:.2}%)",
            d.missing_label_count,
            d.sample_count,
            fraction * 100.0
        ));
    }
    let measurements =
        [("missing_fraction".to_string(), fraction)].into_iter().collect();
    CheckResult::scored("missing_labels", CheckCategory::DataIntegrity, score, map.pass_threshold, findings, measurements)
}

fn property_outliers(d: &DatasetSummary, cfg: &CheckConfig) -> CheckResult {
    let map = cfg.thresholds.property_outliers;
    let mut findings = Vec::new();
    let mut measurements = BTreeMap::new();

    let mut worst: Option<(&str, f64)> = None;
    for f in &d.feature_summaries {
        if f.kind != FeatureKind::Numeric || f.bin_counts.iter().sum::<u64>() == 0 {
            continue;
        }
        let fraction = stats::outlier_mass_fraction(&f.bin_edges, &f.bin_counts);
        measurements.insert(format!("outlier_fraction:{}", f.name), fraction);
        if worst.is_none_or(|(_, w)| fraction > w) {
            worst = Some((&f.name, fraction));
        }
    }
    let score = match worst {
        Some((name, fraction)) => {
            let score = map.score(fraction);
            measurements.insert("worst_outlier_fraction".to_string(), fraction);
            if score < 1.0 {
                findings.push(format!(
                    "feature {name:?} has {:.2}% of mass outside its Tukey fences",
                    fraction * 100.0
                ));
            }
            score
        }
        None => {
            findings.push("no numeric feature summaries to evaluate".to_string());
            1.0
        }
    };
    CheckResult::scored("property_outliers", CheckCategory::DataIntegrity, score, map.pass_threshold, findings, measurements)
}

fn label_property_correlation(d: &DatasetSummary, cfg: &CheckConfig) -> CheckResult {
    let map = cfg.thresholds.label_property_correlation;
    let mut findings = Vec::new();
    let mut measurements = BTreeMap::new();

    let mut worst: Option<(&str, f64)> = None;
    for f in &d.feature_summaries {
        if f.label_bin_counts.is_empty() {
            continue;
        }
        let table: Vec<Vec<u64>> = f.label_bin_counts.values().cloned().collect();
        let v = stats::cramers_v(&table);
        measurements.insert(format!("cramers_v:{}", f.name), v);
        if worst.is_none_or(|(_, w)| v > w) {
            worst = Some((&f.name, v));
        }
    }
    let score = match worst {
        Some((name, v)) => {
            let score = map.score(v);
            measurements.insert("worst_cramers_v".to_string(), v);
            findings.push("association measured with Cramér's V (predictive-power stand-in)".to_string());
            if score < 1.0 {
                findings.push(format!("feature {name:?} is strongly associated with labels (V = {v:.3})"));
            }
            score
        }
        None => {
            findings.push("no joint property-label counts in evidence; association not evaluated".to_string());
            1.0
        }
    };
    CheckResult::scored(
        "label_property_correlation",
        CheckCategory::DataIntegrity,
        score,
        map.pass_threshold,
        findings,
        measurements,
    )
}
