//! Weighted assurance scoring: activity blending, process totals, the final
//! certification score, its confidence band and the criticality verdict.
//!
//! Rounding policy: every weighted contribution is rounded to one decimal,
//! half away from zero, evaluated on the exact decimal expansion of the
//! binary double (87 x 0.15 stores 13.049999... and rounds to 13.0, while
//! 95 x 0.25 stores 23.75 exactly and rounds to 23.8). Totals are sums of
//! the rounded contributions, carried in integer tenths.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classification::ProcessKind;
use crate::evidence::{ManualReviewRecord, ReviewLayer};
use crate::checks::CheckSuiteReport;
use crate::weights::{ActivityWeight, VerdictThresholds, WEIGHT_SUM_TOLERANCE};

/// Rounds to one decimal, half away from zero, deciding on the exact decimal
/// expansion of the double. Returns integer tenths.
///
/// A naive `(x * 10).round() / 10` is wrong here: the multiplication can
/// carry a value across the decimal midpoint it sits just below.
pub fn round_tenths(x: f64) -> i64 {
    debug_assert!(x.is_finite() && x.abs() < 1e12);
    let sign = if x < 0.0 { -1 } else { 1 };
    // 25 fractional digits of the exact binary value; non-tie values differ
    // from any two-decimal midpoint by far more than 1e-17.
    let s = format!("{:.25}", x.abs());
    let (int_part, frac) = s.split_once('.').expect("fixed-precision format has a point");
    let mut tenths: i64 = int_part.parse::<i64>().expect("bounded integer part") * 10
        + (frac.as_bytes()[0] - b'0') as i64;
    let rest = &frac[1..];
    // Midpoint comparison: "5" followed by zeros. Equal-length digit strings
    // compare correctly lexicographically; ties round away from zero.
    let midpoint = {
        let mut m = String::with_capacity(rest.len());
        m.push('5');
        for _ in 1..rest.len() {
            m.push('0');
        }
        m
    };
    if rest >= midpoint.as_str() {
        tenths += 1;
    }
    sign * tenths
}

/// Recovers integer tenths from a double known to carry one decimal.
fn tenths_of(x: f64) -> i64 {
    (x * 10.0).round() as i64
}

fn from_tenths(t: i64) -> f64 {
    t as f64 / 10.0
}

/// How an activity score was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreProvenance {
    AsGiven,
    ManualOnly,
    AutoOnly,
    Blended,
}

/// One activity's score with its full provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityScore {
    pub process: ProcessKind,
    pub activity_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<ReviewLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_component: Option<f64>,
    pub blend_alpha: f64,
    pub value: f64,
    pub provenance: ScoreProvenance,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("activity has neither a manual review nor an automated component")]
    NoInputs,
    #[error("activity weights do not cover the scored activities: {0}")]
    WeightMismatch(String),
    #[error("weights sum to {0}, expected 1")]
    BadWeightSum(f64),
    #[error("expected exactly the four processes, {0}")]
    MissingProcess(String),
    #[error("score {0} outside [0, 100]")]
    OutOfRange(f64),
    #[error("activities without any score input: {}", .0.join(", "))]
    UnscoredActivities(Vec<String>),
}

/// Scores one activity from its manual review and/or the automated suite.
///
/// `as_given` reviews bypass blending entirely. Otherwise the automated
/// component is 100 x the suite's pass fraction, blended as
/// `alpha * manual + (1 - alpha) * auto` when both sides exist.
pub fn activity_score(
    process: ProcessKind,
    activity_id: &str,
    review: Option<&ManualReviewRecord>,
    suite: Option<&CheckSuiteReport>,
    alpha: f64,
) -> Result<ActivityScore, ScoringError> {
    let manual = review.and_then(|r| r.score);
    let layer = review.map(|r| r.layer);
    let auto = suite.map(|s| 100.0 * s.auto_pass_fraction);

    let (value, provenance, auto_component) = if review.is_some_and(|r| r.as_given) {
        let score = manual.ok_or(ScoringError::NoInputs)?;
        (score, ScoreProvenance::AsGiven, None)
    } else {
        match (manual, auto) {
            (Some(m), Some(a)) => (alpha * m + (1.0 - alpha) * a, ScoreProvenance::Blended, Some(a)),
            (Some(m), None) => (m, ScoreProvenance::ManualOnly, None),
            (None, Some(a)) => (a, ScoreProvenance::AutoOnly, Some(a)),
            (None, None) => return Err(ScoringError::NoInputs),
        }
    };

    Ok(ActivityScore {
        process,
        activity_id: activity_id.to_string(),
        layer,
        manual_score: manual,
        auto_component,
        blend_alpha: alpha,
        value,
        provenance,
    })
}

/// One rendered row of a process table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRow {
    pub activity_id: String,
    /// Raw activity score before weighting.
    pub score: f64,
    pub weight: f64,
    /// `round1(weight x score)`.
    pub weighted_score: f64,
}

/// Weighted sum of one process's activities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessScore {
    pub process: ProcessKind,
    pub rows: Vec<ActivityRow>,
    /// Sum of the rounded contributions, one decimal.
    pub total: f64,
}

impl ProcessScore {
    pub fn total_tenths(&self) -> i64 {
        tenths_of(self.total)
    }
}

/// Computes a process score. `weights` must cover exactly the given
/// activities and sum to 1; rows come out in weight order.
pub fn process_score(
    process: ProcessKind,
    activities: &[ActivityScore],
    weights: &[ActivityWeight],
) -> Result<ProcessScore, ScoringError> {
    let activity_ids: BTreeSet<&str> = activities.iter().map(|a| a.activity_id.as_str()).collect();
    let weight_ids: BTreeSet<&str> = weights.iter().map(|w| w.id.as_str()).collect();
    if activity_ids != weight_ids || activities.len() != weights.len() {
        let missing: Vec<&str> = weight_ids.difference(&activity_ids).copied().collect();
        let extra: Vec<&str> = activity_ids.difference(&weight_ids).copied().collect();
        return Err(ScoringError::WeightMismatch(format!(
            "missing scores for [{}], unweighted activities [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    let sum: f64 = weights.iter().map(|w| w.weight).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ScoringError::BadWeightSum(sum));
    }

    let mut rows = Vec::with_capacity(weights.len());
    let mut total_tenths = 0i64;
    for w in weights {
        let activity = activities
            .iter()
            .find(|a| a.activity_id == w.id)
            .expect("activity ids verified above");
        let contribution = round_tenths(w.weight * activity.value);
        total_tenths += contribution;
        rows.push(ActivityRow {
            activity_id: w.id.clone(),
            score: activity.value,
            weight: w.weight,
            weighted_score: from_tenths(contribution),
        });
    }
    Ok(ProcessScore { process, rows, total: from_tenths(total_tenths) })
}

/// Five-level confidence band over the final score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceBand {
    Insufficient,
    Limited,
    Moderate,
    Strong,
    Optimal,
}

impl ConfidenceBand {
    pub fn display_name(&self) -> &'static str {
        match self {
            ConfidenceBand::Optimal => "Optimal Assurance",
            ConfidenceBand::Strong => "Strong Assurance",
            ConfidenceBand::Moderate => "Moderate Assurance",
            ConfidenceBand::Limited => "Limited Assurance",
            ConfidenceBand::Insufficient => "Insufficient Assurance",
        }
    }
}

/// Maps a score in [0, 100] to its confidence band. Boundaries are exact:
/// [90, 100] Optimal, [80, 90) Strong, [70, 80) Moderate, [60, 70) Limited,
/// below 60 Insufficient.
pub fn confidence_level(s: f64) -> Result<ConfidenceBand, ScoringError> {
    if !(0.0..=100.0).contains(&s) {
        return Err(ScoringError::OutOfRange(s));
    }
    Ok(if s >= 90.0 {
        ConfidenceBand::Optimal
    } else if s >= 80.0 {
        ConfidenceBand::Strong
    } else if s >= 70.0 {
        ConfidenceBand::Moderate
    } else if s >= 60.0 {
        ConfidenceBand::Limited
    } else {
        ConfidenceBand::Insufficient
    })
}

/// Certification outcome, ordered so that a higher verdict compares greater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    NotCertified,
    CertifiedModerate,
    CertifiedHigh,
}

impl VerdictKind {
    pub fn display_name(&self) -> &'static str {
        match self {
            VerdictKind::CertifiedHigh => "Certified with High Confidence",
            VerdictKind::CertifiedModerate => "Certified with Moderate Confidence",
            VerdictKind::NotCertified => "Not Certified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub thresholds_used: VerdictThresholds,
}

/// Applies the criticality thresholds: strictly above `high` certifies with
/// high confidence, at or above `moderate` with moderate confidence.
pub fn certification_verdict(s: f64, thresholds: VerdictThresholds) -> Verdict {
    let verdict = if s > thresholds.high {
        VerdictKind::CertifiedHigh
    } else if s >= thresholds.moderate {
        VerdictKind::CertifiedModerate
    } else {
        VerdictKind::NotCertified
    };
    Verdict { verdict, thresholds_used: thresholds }
}

/// One row of the final summary block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessRow {
    pub process: ProcessKind,
    pub score: f64,
    pub weight: f64,
    pub weighted_score: f64,
}

/// The final certification score with band and verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalScore {
    pub process_rows: Vec<ProcessRow>,
    pub value: f64,
    pub band: ConfidenceBand,
    pub verdict: Verdict,
}

/// Aggregates the four process scores into the final certification score.
pub fn final_score(
    processes: &[ProcessScore],
    weights: &BTreeMap<ProcessKind, f64>,
    thresholds: VerdictThresholds,
) -> Result<FinalScore, ScoringError> {
    let mut by_kind: BTreeMap<ProcessKind, &ProcessScore> = BTreeMap::new();
    for p in processes {
        if by_kind.insert(p.process, p).is_some() {
            return Err(ScoringError::MissingProcess(format!("duplicate {:?}", p.process)));
        }
    }
    for kind in ProcessKind::ALL {
        if !by_kind.contains_key(&kind) {
            return Err(ScoringError::MissingProcess(format!("got {} of 4", by_kind.len())));
        }
        if !weights.contains_key(&kind) {
            return Err(ScoringError::WeightMismatch(format!("no weight for {kind:?}")));
        }
    }
    let sum: f64 = weights.values().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ScoringError::BadWeightSum(sum));
    }

    let mut rows = Vec::with_capacity(4);
    let mut value_tenths = 0i64;
    for kind in ProcessKind::ALL {
        let p = by_kind[&kind];
        let weight = weights[&kind];
        let contribution = round_tenths(weight * p.total);
        value_tenths += contribution;
        rows.push(ProcessRow {
            process: kind,
            score: p.total,
            weight,
            weighted_score: from_tenths(contribution),
        });
    }
    let value = from_tenths(value_tenths);
    // Rounding can push an adversarially weighted sum a hair past 100; the
    // band saturates rather than erroring.
    let band = confidence_level(value.clamp(0.0, 100.0))?;
    let verdict = certification_verdict(value, thresholds);
    Ok(FinalScore { process_rows: rows, value, band, verdict })
}
