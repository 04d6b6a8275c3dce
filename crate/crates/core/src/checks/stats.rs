//! Drift and association statistics over histogram summaries.

use std::collections::{BTreeMap, BTreeSet};

use crate::evidence::{FeatureKind, FeatureSummary};

use super::CheckError;

/// Population stability index between two aligned proportion vectors.
///
/// Each proportion is floored at `epsilon` and the vectors renormalized
/// before summing `(p - q) * ln(p / q)`, so zero bins stay finite. The result
/// is a symmetrized KL divergence and therefore never negative.
pub fn psi_proportions(reference: &[f64], current: &[f64], epsilon: f64) -> f64 {
    debug_assert_eq!(reference.len(), current.len());
    let floor = |v: &[f64]| -> Vec<f64> {
        let floored: Vec<f64> = v.iter().map(|p| p.max(epsilon)).collect();
        let total: f64 = floored.iter().sum();
        if total > 0.0 {
            floored.iter().map(|p| p / total).collect()
        } else {
            vec![1.0 / v.len().max(1) as f64; v.len()]
        }
    };
    let p = floor(reference);
    let q = floor(current);
    let mut sum = 0.0;
    for (pi, qi) in p.iter().zip(q.iter()) {
        if pi == qi {
            continue;
        }
        sum += (pi - qi) * (pi / qi).ln();
    }
    sum.max(0.0)
}

fn proportions_from_counts(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|c| *c as f64 / total as f64).collect()
}

/// PSI between two feature summaries of the same shape.
///
/// Numeric summaries must share identical bin edges; categorical summaries
/// must share identical category sets.
pub fn psi(
    reference: &FeatureSummary,
    current: &FeatureSummary,
    epsilon: f64,
) -> Result<f64, CheckError> {
    if reference.kind != current.kind {
        return Err(CheckError::BinMismatch {
            feature: reference.name.clone(),
            detail: "feature kinds differ".to_string(),
        });
    }
    match reference.kind {
        FeatureKind::Numeric => {
            if reference.bin_edges != current.bin_edges {
                return Err(CheckError::BinMismatch {
                    feature: reference.name.clone(),
                    detail: "bin edges differ".to_string(),
                });
            }
            Ok(psi_proportions(
                &proportions_from_counts(&reference.bin_counts),
                &proportions_from_counts(&current.bin_counts),
                epsilon,
            ))
        }
        FeatureKind::Categorical => {
            let ref_keys: Vec<&String> = reference.category_counts.keys().collect();
            let cur_keys: Vec<&String> = current.category_counts.keys().collect();
            if ref_keys != cur_keys {
                return Err(CheckError::BinMismatch {
                    feature: reference.name.clone(),
                    detail: "category sets differ".to_string(),
                });
            }
            let r: Vec<u64> = reference.category_counts.values().copied().collect();
            let c: Vec<u64> = current.category_counts.values().copied().collect();
            Ok(psi_proportions(
                &proportions_from_counts(&r),
                &proportions_from_counts(&c),
                epsilon,
            ))
        }
    }
}

/// Total variation distance between two aligned proportion vectors.
pub fn total_variation_proportions(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Total variation distance between two weighted distributions over string
/// keys. Supports are united; a key missing on one side counts as zero.
/// Each side is normalized by its own mass; an empty side against a nonempty
/// one is at maximal distance 1.
pub fn total_variation(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let p_total: f64 = p.values().sum();
    let q_total: f64 = q.values().sum();
    match (p_total > 0.0, q_total > 0.0) {
        (false, false) => return 0.0,
        (false, true) | (true, false) => return 1.0,
        _ => {}
    }
    let keys: BTreeSet<&String> = p.keys().chain(q.keys()).collect();
    let mut sum = 0.0;
    for key in keys {
        let pv = p.get(key).copied().unwrap_or(0.0) / p_total;
        let qv = q.get(key).copied().unwrap_or(0.0) / q_total;
        sum += (pv - qv).abs();
    }
    0.5 * sum
}

/// Total variation over count maps (e.g. class counts).
pub fn total_variation_counts(p: &BTreeMap<String, u64>, q: &BTreeMap<String, u64>) -> f64 {
    let to_f = |m: &BTreeMap<String, u64>| -> BTreeMap<String, f64> {
        m.iter().map(|(k, v)| (k.clone(), *v as f64)).collect()
    };
    total_variation(&to_f(p), &to_f(q))
}

/// Quantile of a histogram with linear interpolation inside the containing
/// bin. `q` in [0, 1]; counts must not all be zero.
pub fn histogram_quantile(edges: &[f64], counts: &[u64], q: f64) -> f64 {
    let total: u64 = counts.iter().sum();
    debug_assert!(total > 0 && edges.len() == counts.len() + 1);
    let target = q * total as f64;
    let mut cum = 0.0;
    for (i, c) in counts.iter().enumerate() {
        let next = cum + *c as f64;
        if next >= target && *c > 0 {
            let within = ((target - cum) / *c as f64).clamp(0.0, 1.0);
            return edges[i] + within * (edges[i + 1] - edges[i]);
        }
        cum = next;
    }
    edges[edges.len() - 1]
}

/// Fraction of histogram mass outside the Tukey fences
/// `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`, with partial bins interpolated linearly.
pub fn outlier_mass_fraction(edges: &[f64], counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let q1 = histogram_quantile(edges, counts, 0.25);
    let q3 = histogram_quantile(edges, counts, 0.75);
    let iqr = q3 - q1;
    let low = q1 - 1.5 * iqr;
    let high = q3 + 1.5 * iqr;

    let mut outside = 0.0;
    for (i, c) in counts.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let (a, b) = (edges[i], edges[i + 1]);
        let width = b - a;
        let below = ((low - a) / width).clamp(0.0, 1.0);
        let above = ((b - high) / width).clamp(0.0, 1.0);
        outside += (*c as f64) * (below + above).min(1.0);
    }
    outside / total as f64
}

/// Cramér's V over a labels-by-bins contingency table. Zero rows and columns
/// are dropped; a table with fewer than two populated rows or columns has no
/// measurable association and scores 0.
pub fn cramers_v(table: &[Vec<u64>]) -> f64 {
    if table.is_empty() {
        return 0.0;
    }
    let cols = table[0].len();
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let mut col_sums = vec![0u64; cols];
    for row in table {
        for (j, v) in row.iter().enumerate() {
            col_sums[j] += v;
        }
    }
    let n: u64 = row_sums.iter().sum();
    let live_rows: Vec<usize> =
        (0..table.len()).filter(|i| row_sums[*i] > 0).collect();
    let live_cols: Vec<usize> = (0..cols).filter(|j| col_sums[*j] > 0).collect();
    let k = live_rows.len().min(live_cols.len());
    if n == 0 || k < 2 {
        return 0.0;
    }

    let mut chi2 = 0.0;
    for &i in &live_rows {
        for &j in &live_cols {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / n as f64;
            let observed = table[i][j] as f64;
            chi2 += (observed - expected).powi(2) / expected;
        }
    }
    (chi2 / (n as f64 * (k - 1) as f64)).sqrt().clamp(0.0, 1.0)
}
