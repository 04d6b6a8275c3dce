//! Independent reference implementations used to cross-check the engine's
//! numerics. These are deliberately plain: nested loops and direct
//! summations, sharing no code with the implementations they verify.

// Plain indexed loops are the point here.
#![allow(clippy::needless_range_loop, clippy::field_reassign_with_default)]

use std::collections::{BTreeMap, BTreeSet};

use aircert::evidence::{Detection, GroundTruthBox};

#[derive(Debug, Default, Clone, PartialEq)]
pub struct OracleClass {
    pub tp: u64,
    pub fp: u64,
    pub fn_count: u64,
    pub gt_count: u64,
    /// (confidence, is_tp) in descending-confidence order (input order on ties).
    pub ranked: Vec<(f64, bool)>,
}

fn oracle_iou(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let ix = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let iy = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = ix * iy;
    if inter <= 0.0 {
        return 0.0;
    }
    let area_a = (a[2] - a[0]) * (a[3] - a[1]);
    let area_b = (b[2] - b[0]) * (b[3] - b[1]);
    inter / (area_a + area_b - inter)
}

fn rect(d: &aircert::evidence::BoundingBox) -> [f64; 4] {
    [d.x_min, d.y_min, d.x_max, d.y_max]
}

/// Greedy matching, re-derived from the definitions: visit detections of each
/// class in descending confidence (input order on ties); each takes the
/// not-yet-taken ground truth of the same class and image with the highest
/// IoU at or above the threshold (earliest ground truth on IoU ties).
pub fn oracle_match(
    detections: &[Detection],
    ground_truth: &[GroundTruthBox],
    threshold: f64,
) -> BTreeMap<String, OracleClass> {
    let mut labels: BTreeSet<&str> = BTreeSet::new();
    for d in detections {
        labels.insert(&d.label);
    }
    for g in ground_truth {
        labels.insert(&g.label);
    }

    let mut result = BTreeMap::new();
    let mut taken = vec![false; ground_truth.len()];
    for label in labels {
        let mut class = OracleClass::default();
        class.gt_count =
            ground_truth.iter().filter(|g| g.label == label).count() as u64;

        let mut order: Vec<usize> = (0..detections.len())
            .filter(|&i| detections[i].label == label)
            .collect();
        order.sort_by(|&a, &b| {
            detections[b]
                .confidence
                .partial_cmp(&detections[a].confidence)
                .unwrap()
                .then(a.cmp(&b))
        });

        for di in order {
            let det = &detections[di];
            let mut best: Option<usize> = None;
            let mut best_iou = -1.0;
            for (gi, gt) in ground_truth.iter().enumerate() {
                if taken[gi] || gt.label != label || gt.image_id != det.image_id {
                    continue;
                }
                let overlap = oracle_iou(&rect(&det.bbox), &rect(&gt.bbox));
                if overlap >= threshold && overlap > best_iou {
                    best = Some(gi);
                    best_iou = overlap;
                }
            }
            match best {
                Some(gi) => {
                    taken[gi] = true;
                    class.tp += 1;
                    class.ranked.push((det.confidence, true));
                }
                None => {
                    class.fp += 1;
                    class.ranked.push((det.confidence, false));
                }
            }
        }
        class.fn_count = class.gt_count - class.tp;
        result.insert(label.to_string(), class);
    }
    result
}

/// All-point interpolated AP by direct scan: at each recall step, the
/// interpolated precision is found by searching the whole tail.
pub fn oracle_ap(ranked: &[(f64, bool)], gt_count: u64) -> f64 {
    if gt_count == 0 {
        return if ranked.is_empty() { 1.0 } else { 0.0 };
    }
    let n = ranked.len();
    let mut cumulative = Vec::with_capacity(n);
    let mut tp = 0u64;
    for (_, is_tp) in ranked {
        if *is_tp {
            tp += 1;
        }
        cumulative.push(tp);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..n {
        let recall = cumulative[i] as f64 / gt_count as f64;
        if recall > prev_recall {
            let mut best_precision = 0.0;
            for j in i..n {
                let precision = cumulative[j] as f64 / (j + 1) as f64;
                if precision > best_precision {
                    best_precision = precision;
                }
            }
            ap += (recall - prev_recall) * best_precision;
            prev_recall = recall;
        }
    }
    ap
}

/// PSI by direct summation over epsilon-floored, renormalized proportions.
pub fn oracle_psi(reference: &[f64], current: &[f64], epsilon: f64) -> f64 {
    let floor = |v: &[f64]| -> Vec<f64> {
        let raised: Vec<f64> = v.iter().map(|x| x.max(epsilon)).collect();
        let total: f64 = raised.iter().sum();
        raised.iter().map(|x| x / total).collect()
    };
    let p = floor(reference);
    let q = floor(current);
    let mut sum = 0.0;
    for i in 0..p.len() {
        if p[i] != q[i] {
            sum += (p[i] - q[i]) * (p[i] / q[i]).ln();
        }
    }
    sum
}

/// Total variation by direct summation over the united support.
pub fn oracle_tv(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let p_total: f64 = p.values().sum();
    let q_total: f64 = q.values().sum();
    if p_total == 0.0 && q_total == 0.0 {
        return 0.0;
    }
    if p_total == 0.0 || q_total == 0.0 {
        return 1.0;
    }
    let mut keys: BTreeSet<&String> = BTreeSet::new();
    keys.extend(p.keys());
    keys.extend(q.keys());
    let mut sum = 0.0;
    for key in keys {
        let pv = p.get(key).map_or(0.0, |v| v / p_total);
        let qv = q.get(key).map_or(0.0, |v| v / q_total);
        sum += (pv - qv).abs();
    }
    0.5 * sum
}
