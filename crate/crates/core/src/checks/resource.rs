//! Resource-utilization check: p95 latency and peak memory against limits.

use std::collections::BTreeMap;

use crate::classification::CheckCategory;
use crate::config::ResourceLimits;
use crate::evidence::ResourceSamples;

use super::{CheckError, CheckResult};

/// Nearest-rank p95: the k-th smallest sample with k = ceil(0.95 n),
/// computed in integer arithmetic.
fn p95_nearest_rank(latencies: &[f64]) -> f64 {
    let mut sorted = latencies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = sorted.len();
    let rank = (95 * n).div_ceil(100).max(1);
    sorted[rank - 1]
}

pub fn check_resource_utilization(
    r: &ResourceSamples,
    limits: &ResourceLimits,
) -> Result<CheckResult, CheckError> {
    if r.latency_ms.is_empty() {
        return Err(CheckError::EmptySamples);
    }
    let p95 = p95_nearest_rank(&r.latency_ms);
    let peak = r.peak_memory_mb;

    let ratio = |limit: f64, actual: f64| -> f64 {
        if actual <= 0.0 {
            1.0
        } else {
            (limit / actual).clamp(0.0, 1.0)
        }
    };
    let latency_ratio = ratio(limits.latency_p95_ms, p95);
    let memory_ratio = ratio(limits.memory_mb, peak);
    let score = (latency_ratio + memory_ratio) / 2.0;
    let passed = p95 <= limits.latency_p95_ms && peak <= limits.memory_mb;

    let mut findings = Vec::new();
    if p95 > limits.latency_p95_ms {
        findings.push(format!("p95 latency {p95:.1} ms exceeds limit {} ms", limits.latency_p95_ms));
    }
    if peak > limits.memory_mb {
        findings.push(format!("peak memory {peak:.0} MB exceeds limit {} MB", limits.memory_mb));
    }
    let measurements: BTreeMap<String, f64> = [
        ("latency_p95_ms".to_string(), p95),
        ("peak_memory_mb".to_string(), peak),
        ("latency_limit_ms".to_string(), limits.latency_p95_ms),
        ("memory_limit_mb".to_string(), limits.memory_mb),
    ]
    .into_iter()
    .collect();

    Ok(CheckResult::with_passed(
        "resource_utilization",
        CheckCategory::Resource,
        score,
        passed,
        1.0,
        findings,
        measurements,
    ))
}
