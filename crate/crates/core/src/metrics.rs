//! Detection evaluation: IoU, greedy matching, precision/recall/F1, AP and mAP.
//!
//! All functions here are pure and deterministic. Matching is greedy per
//! class and image: detections are visited in descending confidence order
//! (ties broken by input order) and each takes the unmatched ground truth of
//! the same class and image with the highest IoU at or above the threshold
//! (IoU ties broken by ground-truth input order). AP uses all-point
//! interpolation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{BoundingBox, Detection, GroundTruthBox, PredictionSet};

/// Per-class tallies and the confidence-ranked detection outcomes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassMatch {
    pub tp: u64,
    pub fp: u64,
    pub fn_count: u64,
    /// `(confidence, is_tp)` in descending-confidence order (input order on ties).
    pub scored_detections: Vec<(f64, bool)>,
    /// Ground-truth boxes of this class.
    pub gt_count: u64,
}

/// Matching outcome over all classes present in either input.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    pub per_class: BTreeMap<String, ClassMatch>,
}

impl MatchResult {
    pub fn totals(&self) -> (u64, u64, u64) {
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_count = 0;
        for m in self.per_class.values() {
            tp += m.tp;
            fp += m.fp;
            fn_count += m.fn_count;
        }
        (tp, fp, fn_count)
    }
}

/// Headline detection metrics at a single IoU threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map_50: f64,
    pub per_class_ap: BTreeMap<String, f64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("prediction set has no ground truth")]
    NoGroundTruth,
}

/// Looks up a headline metric by its configuration name.
pub fn metric_value(m: &PerformanceMetrics, name: &str) -> Option<f64> {
    match name {
        "precision" => Some(m.precision),
        "recall" => Some(m.recall),
        "f1" => Some(m.f1),
        "map_50" => Some(m.map_50),
        _ => None,
    }
}

/// Intersection over union of two rectangles; 0 when disjoint.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let iy = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let intersection = ix * iy;
    if intersection <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - intersection;
    intersection / union
}

/// Greedy confidence-ordered matching of detections against ground truth.
pub fn match_detections(
    detections: &[Detection],
    ground_truth: &[GroundTruthBox],
    iou_threshold: f64,
) -> MatchResult {
    let mut result = MatchResult::default();

    for gt in ground_truth {
        result.per_class.entry(gt.label.clone()).or_default().gt_count += 1;
    }
    for det in detections {
        result.per_class.entry(det.label.clone()).or_default();
    }

    // Index ground truths per (label, image); values are indices into `ground_truth`.
    let mut gt_index: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, gt) in ground_truth.iter().enumerate() {
        gt_index.entry((gt.label.as_str(), gt.image_id.as_str())).or_default().push(i);
    }
    let mut gt_matched = vec![false; ground_truth.len()];

    // Detection visit order: descending confidence, input order on ties.
    let mut det_order: Vec<usize> = (0..detections.len()).collect();
    det_order.sort_by(|&a, &b| {
        detections[b]
            .confidence
            .partial_cmp(&detections[a].confidence)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    for &di in &det_order {
        let det = &detections[di];
        let mut best: Option<(usize, f64)> = None;
        if let Some(candidates) = gt_index.get(&(det.label.as_str(), det.image_id.as_str())) {
            for &gi in candidates {
                if gt_matched[gi] {
                    continue;
                }
                let overlap = iou(&det.bbox, &ground_truth[gi].bbox);
                if overlap < iou_threshold {
                    continue;
                }
                // Strictly-greater keeps the earliest ground truth on IoU ties.
                if best.is_none_or(|(_, b)| overlap > b) {
                    best = Some((gi, overlap));
                }
            }
        }
        let class = result.per_class.get_mut(&det.label).expect("class entry exists");
        match best {
            Some((gi, _)) => {
                gt_matched[gi] = true;
                class.tp += 1;
                class.scored_detections.push((det.confidence, true));
            }
            None => {
                class.fp += 1;
                class.scored_detections.push((det.confidence, false));
            }
        }
    }

    for class in result.per_class.values_mut() {
        class.fn_count = class.gt_count - class.tp;
    }
    result
}

/// Micro-averaged precision, recall and F1 over all classes.
///
/// A ratio with denominator zero is vacuously 1.0 (nothing was there to get
/// wrong); F1 is 0 when precision + recall is 0.
pub fn precision_recall_f1(m: &MatchResult) -> (f64, f64, f64) {
    let (tp, fp, fn_count) = m.totals();
    let precision = if tp + fp == 0 { 1.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_count == 0 { 1.0 } else { tp as f64 / (tp + fn_count) as f64 };
    let f1 =
        if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    (precision, recall, f1)
}

/// All-point interpolated average precision over a confidence-ranked outcome
/// list. Vacuous conventions: 1.0 for no ground truth and no detections,
/// 0.0 for detections with no ground truth.
pub fn average_precision(scored: &[(f64, bool)], gt_count: u64) -> f64 {
    if gt_count == 0 {
        return if scored.is_empty() { 1.0 } else { 0.0 };
    }
    let mut precisions = Vec::with_capacity(scored.len());
    let mut recalls = Vec::with_capacity(scored.len());
    let mut tp_cum = 0u64;
    for (rank, (_, is_tp)) in scored.iter().enumerate() {
        if *is_tp {
            tp_cum += 1;
        }
        precisions.push(tp_cum as f64 / (rank + 1) as f64);
        recalls.push(tp_cum as f64 / gt_count as f64);
    }
    // Interpolated precision: max precision at or right of each rank.
    let mut max_right = 0.0f64;
    let mut interp = vec![0.0; precisions.len()];
    for i in (0..precisions.len()).rev() {
        max_right = max_right.max(precisions[i]);
        interp[i] = max_right;
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..recalls.len() {
        let delta = recalls[i] - prev_recall;
        if delta > 0.0 {
            ap += delta * interp[i];
            prev_recall = recalls[i];
        }
    }
    ap
}

/// Full evaluation of a prediction set at one IoU threshold.
///
/// `map_50` is the unweighted mean of per-class AP over classes present in
/// the ground truth; precision/recall/F1 are micro-averaged over everything.
pub fn evaluate_performance(
    p: &PredictionSet,
    iou_threshold: f64,
) -> Result<PerformanceMetrics, MetricsError> {
    if p.ground_truth.is_empty() {
        return Err(MetricsError::NoGroundTruth);
    }
    let matches = match_detections(&p.detections, &p.ground_truth, iou_threshold);
    let (precision, recall, f1) = precision_recall_f1(&matches);

    let mut per_class_ap = BTreeMap::new();
    for (label, class) in &matches.per_class {
        if class.gt_count > 0 {
            per_class_ap
                .insert(label.clone(), average_precision(&class.scored_detections, class.gt_count));
        }
    }
    let map_50 = if per_class_ap.is_empty() {
        0.0
    } else {
        per_class_ap.values().sum::<f64>() / per_class_ap.len() as f64
    };

    Ok(PerformanceMetrics { precision, recall, f1, map_50, per_class_ap })
}
