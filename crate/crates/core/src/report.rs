//! Assurance profile assembly and rendering.
//!
//! The profile is the full scored table: per-activity rows, per-process
//! totals, the final score with band and verdict, the automated check report
//! when evidence allowed one, and per-score provenance. It renders as
//! canonical JSON (the hashing form) or as a Markdown table.
//!
//! Reports are deterministic apart from `generated_at`; pass a fixed clock
//! (CLI `--fixed-clock`, or the `AIRCERT_FIXED_CLOCK` environment variable)
//! to make output byte-identical across runs.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;
use crate::checks::{run_check_suite, CheckError, CheckSuiteReport};
use crate::classification::{
    parse_classification, required_validation_level, Classification, ClassificationError,
    ProcessKind, ValidationLevel,
};
use crate::config::CheckConfig;
use crate::evidence::EvidenceBundle;
use crate::scoring::{
    activity_score, final_score, process_score, ActivityScore, FinalScore, ProcessScore,
    ScoringError,
};
use crate::weights::{resolve_weight_profile, RegistryError, WeightProfile, WeightRegistry};

/// Environment variable carrying an RFC 3339 fixed timestamp.
pub const FIXED_CLOCK_ENV: &str = "AIRCERT_FIXED_CLOCK";

/// Resolves the report clock: explicit value, then the environment variable,
/// then the system clock.
pub fn resolve_clock(fixed: Option<&str>) -> Result<DateTime<Utc>, ReportError> {
    let from_env = std::env::var(FIXED_CLOCK_ENV).ok();
    let source = fixed.map(str::to_string).or(from_env);
    match source {
        Some(text) => text
            .parse::<DateTime<Utc>>()
            .map_err(|e| ReportError::BadClock(format!("{text:?}: {e}"))),
        None => Ok(Utc::now()),
    }
}

/// The consolidated certification document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssuranceProfile {
    pub classification: Classification,
    pub validation_level: ValidationLevel,
    /// Matched weight-registry key.
    pub weight_profile_key: String,
    /// Per-activity scores with provenance, in report order.
    pub activity_scores: Vec<ActivityScore>,
    pub process_scores: Vec<ProcessScore>,
    #[serde(rename = "final")]
    pub final_score: FinalScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite_report: Option<CheckSuiteReport>,
    pub generated_at: DateTime<Utc>,
    pub engine_version: String,
    /// Canonical-form hashes of bundle, weight registry and configuration.
    pub input_checksums: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("classification: {0}")]
    Classification(#[from] ClassificationError),
    #[error("weight registry: {0}")]
    Registry(#[from] RegistryError),
    #[error("check suite: {0}")]
    Check(#[from] CheckError),
    #[error("scoring: {0}")]
    Scoring(#[from] ScoringError),
    #[error("invalid fixed clock {0}")]
    BadClock(String),
}

/// Builds the assurance profile: runs the check suite when any category has
/// evidence, scores every activity named by the weight profile, and
/// aggregates process and final scores.
pub fn build_assurance_profile(
    bundle: &EvidenceBundle,
    registry: &WeightRegistry,
    cfg: &CheckConfig,
    now: DateTime<Utc>,
) -> Result<AssuranceProfile, ReportError> {
    let classification = parse_classification(&bundle.classification_text)?;
    let profile = resolve_weight_profile(&classification, registry)?;
    let validation_level = required_validation_level(&classification);

    let suite_report = match run_check_suite(bundle, &classification, &profile, cfg) {
        Ok(report) => Some(report),
        Err(CheckError::NothingAssessable) => None,
        Err(other) => return Err(other.into()),
    };

    let mut activity_scores = Vec::new();
    let mut unscored = Vec::new();
    for kind in ProcessKind::ALL {
        let suite_for_process = if cfg.process_gets_auto_component(kind) {
            suite_report.as_ref()
        } else {
            None
        };
        for weight in &profile.activity_weights[&kind] {
            let review = bundle
                .manual_reviews
                .iter()
                .find(|r| r.process == kind && r.activity_id == weight.id);
            let alpha = cfg.blend_alpha_for(&weight.id);
            match activity_score(kind, &weight.id, review, suite_for_process, alpha) {
                Ok(score) => activity_scores.push(score),
                Err(ScoringError::NoInputs) => {
                    unscored.push(format!("{}/{}", kind.short_name(), weight.id));
                }
                Err(other) => return Err(other.into()),
            }
        }
    }
    if !unscored.is_empty() {
        return Err(ScoringError::UnscoredActivities(unscored).into());
    }

    let mut process_scores = Vec::with_capacity(4);
    for kind in ProcessKind::ALL {
        let activities: Vec<ActivityScore> =
            activity_scores.iter().filter(|a| a.process == kind).cloned().collect();
        process_scores.push(process_score(kind, &activities, &profile.activity_weights[&kind])?);
    }
    let final_score =
        final_score(&process_scores, &profile.process_weights, profile.verdict_thresholds)?;

    let input_checksums = vec![
        bundle.bundle_checksum.clone().unwrap_or_else(|| bundle.compute_checksum()),
        canonical::canonical_hash(registry).expect("registry serializes"),
        canonical::canonical_hash(cfg).expect("config serializes"),
    ];

    Ok(AssuranceProfile {
        classification,
        validation_level,
        weight_profile_key: profile.source_key.clone(),
        activity_scores,
        process_scores,
        final_score,
        suite_report,
        generated_at: now,
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        input_checksums,
    })
}

/// Convenience wrapper resolving the weight profile separately, for callers
/// that already parsed their inputs.
pub fn weight_profile_for(
    bundle: &EvidenceBundle,
    registry: &WeightRegistry,
) -> Result<(Classification, WeightProfile), ReportError> {
    let classification = parse_classification(&bundle.classification_text)?;
    let profile = resolve_weight_profile(&classification, registry)?;
    Ok((classification, profile))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Json,
    Markdown,
}

fn fmt1(x: f64) -> String {
    format!("{x:.1}")
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

/// Renders the profile. JSON output is the canonical serialization used for
/// hashing; Markdown mirrors the published table layout (activity rows with
/// score, weight and weighted score; process totals; a final summary block).
/// Scores print with one decimal, weights with two.
pub fn render_profile(profile: &AssuranceProfile, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => {
            canonical::to_canonical_json(profile).expect("profile serializes")
        }
        RenderFormat::Markdown => render_markdown(profile),
    }
}

fn render_markdown(p: &AssuranceProfile) -> String {
    let mut out = String::new();
    let crit = p.classification.crit.as_str();
    out.push_str(&format!("# ML Component Certification Summary (DO-178C Level {crit})\n\n"));
    out.push_str(&format!("- Classification: {}\n", p.classification));
    out.push_str(&format!(
        "- Validation level: {} ({})\n",
        p.validation_level,
        p.validation_level.description()
    ));
    out.push_str(&format!("- Weight profile: {}\n", p.weight_profile_key));
    out.push_str(&format!(
        "- Generated: {} by aircert {}\n\n",
        p.generated_at.format("%Y-%m-%dT%H:%M:%SZ"),
        p.engine_version
    ));

    out.push_str("| Process | Score (100) | Weight | Weighted Score |\n");
    out.push_str("|---|---|---|---|\n");
    for process in &p.process_scores {
        out.push_str(&format!("| **{}** | | | |\n", process.process.section_header()));
        for row in &process.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                row.activity_id,
                fmt1(row.score),
                fmt2(row.weight),
                fmt1(row.weighted_score)
            ));
        }
        out.push_str(&format!(
            "| **Total {} Score** | | | **{}** |\n",
            process.process.short_name(),
            fmt1(process.total)
        ));
    }
    out.push_str("| **Final Certification Summary** | | | |\n");
    for row in &p.final_score.process_rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            row.process.short_name(),
            fmt1(row.score),
            fmt2(row.weight),
            fmt1(row.weighted_score)
        ));
    }
    out.push_str(&format!(
        "| **Final Certification Score** | | | **{}** |\n\n",
        fmt1(p.final_score.value)
    ));

    out.push_str("## Outcome\n\n");
    out.push_str(&format!(
        "- Confidence level: {}\n",
        p.final_score.band.display_name()
    ));
    let thresholds = p.final_score.verdict.thresholds_used;
    out.push_str(&format!(
        "- Verdict: {} (high > {}, moderate >= {})\n\n",
        p.final_score.verdict.verdict.display_name(),
        fmt1(thresholds.high),
        fmt1(thresholds.moderate)
    ));

    if let Some(suite) = &p.suite_report {
        out.push_str("## Automated Check Summary\n\n");
        let executed: usize = suite.category_scores.iter().map(|c| c.check_results.len()).sum();
        let passed: usize = suite
            .category_scores
            .iter()
            .flat_map(|c| &c.check_results)
            .filter(|c| c.passed)
            .count();
        out.push_str(&format!(
            "- Suite score: {} at {} | checks passed: {passed}/{executed} ({})\n\n",
            fmt1(suite.suite_score),
            suite.validation_level,
            fmt1(suite.auto_pass_fraction * 100.0)
        ));
        out.push_str("| Category | Weight | Score (%) | Checks Passed |\n");
        out.push_str("|---|---|---|---|\n");
        for cs in &suite.category_scores {
            let cat_passed = cs.check_results.iter().filter(|c| c.passed).count();
            out.push_str(&format!(
                "| {} | {} | {} | {}/{} |\n",
                cs.category.display_name(),
                fmt2(suite.category_weights[&cs.category]),
                fmt1(cs.score * 100.0),
                cat_passed,
                cs.check_results.len()
            ));
        }
        out.push('\n');
        let failed: Vec<&crate::checks::CheckResult> = suite
            .category_scores
            .iter()
            .flat_map(|c| &c.check_results)
            .filter(|c| !c.passed)
            .collect();
        if !failed.is_empty() {
            out.push_str("Failed checks:\n\n");
            for check in failed {
                let detail = if check.findings.is_empty() {
                    String::new()
                } else {
                    format!(" — {}", check.findings.join("; "))
                };
                out.push_str(&format!(
                    "- `{}` scored {}{detail}\n",
                    check.check_id,
                    fmt1(check.score * 100.0)
                ));
            }
            out.push('\n');
        }
        let unassessed: Vec<&crate::evidence::CoverageEntry> =
            suite.coverage.iter().filter(|e| !e.assessable).collect();
        if !unassessed.is_empty() {
            out.push_str("Not assessed:\n\n");
            for entry in unassessed {
                out.push_str(&format!("- {}: {}\n", entry.category.display_name(), entry.reason));
            }
            out.push('\n');
        }
    }

    out.push_str("## Score Provenance\n\n");
    out.push_str("| Process | Activity | Source | Manual | Automated | Alpha |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for a in &p.activity_scores {
        let manual = a.manual_score.map(fmt1).unwrap_or_else(|| "-".to_string());
        let auto = a.auto_component.map(fmt1).unwrap_or_else(|| "-".to_string());
        let source = match a.provenance {
            crate::scoring::ScoreProvenance::AsGiven => "as given",
            crate::scoring::ScoreProvenance::ManualOnly => "manual only",
            crate::scoring::ScoreProvenance::AutoOnly => "automated only",
            crate::scoring::ScoreProvenance::Blended => "blended",
        };
        let alpha = if a.provenance == crate::scoring::ScoreProvenance::Blended {
            fmt2(a.blend_alpha)
        } else {
            "-".to_string()
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            a.process.short_name(),
            a.activity_id,
            source,
            manual,
            auto,
            alpha
        ));
    }
    out.push('\n');

    out.push_str("## Inputs\n\n");
    for (label, hash) in ["bundle", "weights", "config"].iter().zip(&p.input_checksums) {
        out.push_str(&format!("- {label}: `{hash}`\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_now() -> DateTime<Utc> {
        "2026-01-15T12:00:00Z".parse().unwrap()
    }

    #[test]
    fn reference_fixture_reproduces_published_totals() {
        let bundle = crate::fixtures::table1_bundle();
        let profile = build_assurance_profile(
            &bundle,
            &WeightRegistry::builtin(),
            &CheckConfig::default(),
            fixed_now(),
        )
        .unwrap();
        assert_eq!(profile.final_score.value, 74.7);
        assert_eq!(profile.final_score.band, crate::scoring::ConfidenceBand::Moderate);
        assert_eq!(
            profile.final_score.verdict.verdict,
            crate::scoring::VerdictKind::CertifiedModerate
        );
        // No datasets or predictions in the reference fixture: no suite.
        assert!(profile.suite_report.is_none());
        let totals: Vec<f64> = profile.process_scores.iter().map(|p| p.total).collect();
        assert_eq!(totals, vec![78.2, 90.0, 52.5, 61.5]);
    }

    #[test]
    fn markdown_carries_reference_rows() {
        let bundle = crate::fixtures::table1_bundle();
        let profile = build_assurance_profile(
            &bundle,
            &WeightRegistry::builtin(),
            &CheckConfig::default(),
            fixed_now(),
        )
        .unwrap();
        let md = render_profile(&profile, RenderFormat::Markdown);
        for row in [
            "| Dataset Quality | 80.0 | 0.40 | 32.0 |",
            "| Model Documentation | 82.0 | 0.35 | 28.7 |",
            "| Integration Documentation | 70.0 | 0.25 | 17.5 |",
            "| **Total Development Score** | | | **78.2** |",
            "| Human Factors | 87.0 | 0.15 | 13.0 |",
            "| **Total V&V Score** | | | **90.0** |",
            "| Post-Certification Monitoring | 55.0 | 0.35 | 19.3 |",
            "| **Total QA Score** | | | **52.5** |",
            "| **Total SCM Score** | | | **61.5** |",
            "| Development | 78.2 | 0.30 | 23.5 |",
            "| **Final Certification Score** | | | **74.7** |",
        ] {
            assert!(md.contains(row), "missing row {row:?} in:\n{md}");
        }
        // No automated section without a suite report.
        assert!(!md.contains("Automated Check Summary"));
    }

    #[test]
    fn json_round_trips_structurally() {
        let bundle = crate::fixtures::table1_bundle();
        let profile = build_assurance_profile(
            &bundle,
            &WeightRegistry::builtin(),
            &CheckConfig::default(),
            fixed_now(),
        )
        .unwrap();
        let json = render_profile(&profile, RenderFormat::Json);
        let back: AssuranceProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(profile, back);
    }

    #[test]
    fn rendering_is_stable_under_fixed_clock() {
        let bundle = crate::fixtures::full_bundle();
        let registry = WeightRegistry::builtin();
        let cfg = CheckConfig::default();
        let a = build_assurance_profile(&bundle, &registry, &cfg, fixed_now()).unwrap();
        let b = build_assurance_profile(&bundle, &registry, &cfg, fixed_now()).unwrap();
        assert_eq!(
            render_profile(&a, RenderFormat::Markdown),
            render_profile(&b, RenderFormat::Markdown)
        );
        assert_eq!(
            render_profile(&a, RenderFormat::Json),
            render_profile(&b, RenderFormat::Json)
        );
    }

    #[test]
    fn rendered_numbers_use_fixed_decimal_places() {
        let bundle = crate::fixtures::full_bundle();
        let profile = build_assurance_profile(
            &bundle,
            &WeightRegistry::builtin(),
            &CheckConfig::default(),
            fixed_now(),
        )
        .unwrap();
        let md = render_profile(&profile, RenderFormat::Markdown);
        let decimals = |cell: &str| -> Option<usize> {
            let cell = cell.trim().trim_matches('*');
            let (whole, frac) = cell.split_once('.')?;
            (whole.chars().all(|c| c.is_ascii_digit()) && frac.chars().all(|c| c.is_ascii_digit()))
                .then_some(frac.len())
        };
        let mut scores = 0;
        let mut weights = 0;
        for line in md.lines().filter(|l| l.starts_with('|') && !l.starts_with("|---")) {
            let cells: Vec<&str> = line.trim_matches('|').split('|').collect();
            if cells.len() != 4 {
                continue;
            }
            // Columns: label, score, weight, weighted score.
            if let Some(places) = decimals(cells[1]) {
                assert_eq!(places, 1, "score cell {:?} in {line:?}", cells[1]);
                scores += 1;
            }
            if let Some(places) = decimals(cells[2]) {
                assert_eq!(places, 2, "weight cell {:?} in {line:?}", cells[2]);
                weights += 1;
            }
            if let Some(places) = decimals(cells[3]) {
                assert_eq!(places, 1, "weighted cell {:?} in {line:?}", cells[3]);
            }
        }
        assert!(scores >= 14 && weights >= 14, "table rows were actually checked");
    }

    #[test]
    fn missing_reviews_name_the_unscored_activities() {
        let mut bundle = crate::fixtures::table1_bundle();
        bundle.manual_reviews.retain(|r| r.process != ProcessKind::Qa);
        let err = build_assurance_profile(
            &bundle,
            &WeightRegistry::builtin(),
            &CheckConfig::default(),
            fixed_now(),
        )
        .unwrap_err();
        match err {
            ReportError::Scoring(ScoringError::UnscoredActivities(names)) => {
                assert_eq!(names.len(), 3);
                assert!(names.iter().all(|n| n.starts_with("QA/")), "{names:?}");
            }
            other => panic!("expected unscored activities, got {other}"),
        }
    }

    #[test]
    fn all_perfect_fixture_certifies_high() {
        let mut bundle = crate::fixtures::table1_bundle();
        for review in &mut bundle.manual_reviews {
            review.score = Some(100.0);
        }
        let profile = build_assurance_profile(
            &bundle,
            &WeightRegistry::builtin(),
            &CheckConfig::default(),
            fixed_now(),
        )
        .unwrap();
        assert_eq!(profile.final_score.value, 100.0);
        assert_eq!(profile.final_score.band, crate::scoring::ConfidenceBand::Optimal);
        assert_eq!(
            profile.final_score.verdict.verdict,
            crate::scoring::VerdictKind::CertifiedHigh
        );
    }
}
