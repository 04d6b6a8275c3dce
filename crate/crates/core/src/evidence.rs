//! Evidence bundle ingestion.
//!
//! The bundle is a single JSON document carrying every machine-readable input
//! the checks and scoring stages consume: dataset summaries (histograms, not
//! raw data), prediction dumps with ground truth, manual review records,
//! resource samples, the uncertainty configuration and the artifact manifest.
//! Loading parses, validates every structural invariant, and verifies the
//! bundle checksum when one is stored.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;
use crate::classification::{CheckCategory, ProcessKind, ValidationLevel};
use crate::ledger::ArtifactManifest;

/// Which split a dataset summary describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSplit {
    Train,
    Test,
    Operational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Histogram summary of one feature (e.g. brightness, bbox-area).
///
/// Numeric features carry `bin_edges`/`bin_counts`; categorical features
/// carry `category_counts`. `label_bin_counts` optionally carries the joint
/// property-by-label contingency counts used by the label-property
/// correlation check; its rows align with `bin_counts` (numeric) or with the
/// sorted category keys (categorical).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bin_edges: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bin_counts: Vec<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub category_counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub label_bin_counts: BTreeMap<String, Vec<u64>>,
}

impl FeatureSummary {
    pub fn total_count(&self) -> u64 {
        match self.kind {
            FeatureKind::Numeric => self.bin_counts.iter().sum(),
            FeatureKind::Categorical => self.category_counts.values().sum(),
        }
    }

    /// Column count expected of each `label_bin_counts` row.
    fn joint_width(&self) -> usize {
        match self.kind {
            FeatureKind::Numeric => self.bin_counts.len(),
            FeatureKind::Categorical => self.category_counts.len(),
        }
    }
}

/// Aggregate description of one dataset split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub split: DatasetSplit,
    pub class_counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_summaries: Vec<FeatureSummary>,
    pub sample_count: u64,
    #[serde(default)]
    pub missing_label_count: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// Axis-aligned pixel rectangle, serialized as `[x_min, y_min, x_max, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn is_valid(&self) -> bool {
        self.x_min.is_finite()
            && self.y_min.is_finite()
            && self.x_max.is_finite()
            && self.y_max.is_finite()
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

impl From<[f64; 4]> for BoundingBox {
    fn from(v: [f64; 4]) -> Self {
        BoundingBox { x_min: v[0], y_min: v[1], x_max: v[2], y_max: v[3] }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

/// One model detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub label: String,
    pub confidence: f64,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

/// One annotated ground-truth object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBox {
    pub image_id: String,
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

/// Capture condition of a prediction run: the unperturbed baseline or one of
/// the perturbation kinds, with `Other` carrying a free-text tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PerturbationCondition {
    Baseline,
    Noise,
    Occlusion,
    MotionBlur,
    Other(String),
}

impl PerturbationCondition {
    pub fn as_token(&self) -> String {
        match self {
            PerturbationCondition::Baseline => "baseline".to_string(),
            PerturbationCondition::Noise => "perturbed:noise".to_string(),
            PerturbationCondition::Occlusion => "perturbed:occlusion".to_string(),
            PerturbationCondition::MotionBlur => "perturbed:motion_blur".to_string(),
            PerturbationCondition::Other(tag) if tag.is_empty() => "perturbed:other".to_string(),
            PerturbationCondition::Other(tag) => format!("perturbed:other:{tag}"),
        }
    }

    pub fn parse_token(token: &str) -> Option<Self> {
        match token {
            "baseline" => Some(PerturbationCondition::Baseline),
            "perturbed:noise" => Some(PerturbationCondition::Noise),
            "perturbed:occlusion" => Some(PerturbationCondition::Occlusion),
            "perturbed:motion_blur" => Some(PerturbationCondition::MotionBlur),
            "perturbed:other" => Some(PerturbationCondition::Other(String::new())),
            other => other
                .strip_prefix("perturbed:other:")
                .map(|tag| PerturbationCondition::Other(tag.to_string())),
        }
    }

    pub fn is_baseline(&self) -> bool {
        matches!(self, PerturbationCondition::Baseline)
    }
}

impl std::fmt::Display for PerturbationCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.as_token())
    }
}

impl Serialize for PerturbationCondition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.as_token())
    }
}

impl<'de> Deserialize<'de> for PerturbationCondition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let token = String::deserialize(deserializer)?;
        PerturbationCondition::parse_token(&token).ok_or_else(|| {
            serde::de::Error::custom(format!(
                "unknown prediction condition {token:?} (expected baseline, perturbed:noise, \
                 perturbed:occlusion, perturbed:motion_blur or perturbed:other[:tag])"
            ))
        })
    }
}

/// One prediction run: detections plus the ground truth they are scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub run_id: String,
    pub condition: PerturbationCondition,
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<GroundTruthBox>,
    pub image_ids: Vec<String>,
}

/// Certification layer a manual review belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewLayer {
    Base,
    Ml,
    HumanFactors,
}

/// A human reviewer's score for one activity. When `as_given` is set the
/// score is used verbatim as the activity score with no automated blending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManualReviewRecord {
    pub process: ProcessKind,
    pub activity_id: String,
    pub layer: ReviewLayer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub reviewer: String,
    #[serde(default)]
    pub rationale: String,
    #[serde(default)]
    pub as_given: bool,
}

/// Measured runtime resource usage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceSamples {
    pub latency_ms: Vec<f64>,
    pub peak_memory_mb: f64,
    pub platform: String,
}

/// Confidence handling for ambiguous detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyConfig {
    pub confidence_threshold: f64,
    /// `[low, high]` confidence band routed to human review.
    pub ambiguous_band: (f64, f64),
    pub failsafe_policy: String,
}

/// The complete machine-checkable evidence for one certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceBundle {
    #[serde(rename = "classification")]
    pub classification_text: String,
    #[serde(rename = "datasets", default, skip_serializing_if = "Vec::is_empty")]
    pub dataset_summaries: Vec<DatasetSummary>,
    #[serde(rename = "predictions", default, skip_serializing_if = "Vec::is_empty")]
    pub prediction_sets: Vec<PredictionSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub manual_reviews: Vec<ManualReviewRecord>,
    #[serde(rename = "resources", default, skip_serializing_if = "Option::is_none")]
    pub resource_samples: Option<ResourceSamples>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyConfig>,
    pub manifest: ArtifactManifest,
    #[serde(rename = "checksum", default, skip_serializing_if = "Option::is_none")]
    pub bundle_checksum: Option<String>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read evidence bundle: {0}")]
    Io(#[from] std::io::Error),
    #[error("evidence bundle parse error: {detail}")]
    Parse { detail: String },
    #[error("schema violation ({invariant}): {context}")]
    SchemaViolation { invariant: String, context: String },
    #[error("bundle checksum mismatch: stored {stored}, computed {computed}")]
    ChecksumMismatch { stored: String, computed: String },
}

fn violation(invariant: &str, context: impl Into<String>) -> IngestError {
    IngestError::SchemaViolation { invariant: invariant.to_string(), context: context.into() }
}

impl EvidenceBundle {
    /// Checksum over the canonical serialization of every section except the
    /// checksum field itself.
    pub fn compute_checksum(&self) -> String {
        let mut value = serde_json::to_value(self).expect("bundle serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("checksum");
        }
        canonical::sha256_hex(canonical::value_to_canonical_json(&value).as_bytes())
    }

    /// Canonical JSON of the bundle, checksum field included.
    pub fn to_canonical_json(&self) -> String {
        canonical::to_canonical_json(self).expect("bundle serializes")
    }

    pub fn summary_for(&self, split: DatasetSplit) -> Option<&DatasetSummary> {
        self.dataset_summaries.iter().find(|d| d.split == split)
    }

    /// Train summary when present, else the test summary.
    pub fn integrity_summary(&self) -> Option<&DatasetSummary> {
        self.summary_for(DatasetSplit::Train).or_else(|| self.summary_for(DatasetSplit::Test))
    }

    pub fn baseline_predictions(&self) -> Option<&PredictionSet> {
        self.prediction_sets.iter().find(|p| p.condition.is_baseline())
    }

    pub fn perturbed_predictions(&self) -> Vec<&PredictionSet> {
        self.prediction_sets.iter().filter(|p| !p.condition.is_baseline()).collect()
    }

    /// Checks every structural invariant, in a fixed order so error messages
    /// are deterministic.
    pub fn validate(&self) -> Result<(), IngestError> {
        crate::classification::parse_classification(&self.classification_text)
            .map_err(|e| violation("classification", e.to_string()))?;

        for (di, d) in self.dataset_summaries.iter().enumerate() {
            let ctx = format!("datasets[{di}]");
            if d.missing_label_count > d.sample_count {
                return Err(violation(
                    "missing labels within sample count",
                    format!("{ctx}: missing_label_count {} > sample_count {}", d.missing_label_count, d.sample_count),
                ));
            }
            for (fi, f) in d.feature_summaries.iter().enumerate() {
                let fctx = format!("{ctx}.feature_summaries[{fi}] ({})", f.name);
                match f.kind {
                    FeatureKind::Numeric => {
                        if f.bin_edges.len() < 2 || f.bin_counts.len() != f.bin_edges.len() - 1 {
                            return Err(violation(
                                "numeric feature shape",
                                format!(
                                    "{fctx}: expected |bin_counts| = |bin_edges| - 1, got {} edges and {} counts",
                                    f.bin_edges.len(),
                                    f.bin_counts.len()
                                ),
                            ));
                        }
                        if !f.bin_edges.windows(2).all(|w| w[0] < w[1]) {
                            return Err(violation(
                                "strictly increasing bin edges",
                                format!("{fctx}: edges are not strictly increasing"),
                            ));
                        }
                    }
                    FeatureKind::Categorical => {
                        if f.category_counts.is_empty() {
                            return Err(violation(
                                "nonempty category counts",
                                format!("{fctx}: categorical feature has no categories"),
                            ));
                        }
                    }
                }
                if f.total_count() > d.sample_count {
                    return Err(violation(
                        "feature counts within sample count",
                        format!("{fctx}: bin counts sum to {} > sample_count {}", f.total_count(), d.sample_count),
                    ));
                }
                let width = f.joint_width();
                for (label, row) in &f.label_bin_counts {
                    if row.len() != width {
                        return Err(violation(
                            "joint count row width",
                            format!("{fctx}: label {label:?} row has {} entries, expected {width}", row.len()),
                        ));
                    }
                }
            }
        }

        let mut baseline_count = 0usize;
        for (pi, p) in self.prediction_sets.iter().enumerate() {
            let ctx = format!("predictions[{pi}] ({})", p.run_id);
            if p.condition.is_baseline() {
                baseline_count += 1;
            }
            let ids: BTreeSet<&str> = p.image_ids.iter().map(|s| s.as_str()).collect();
            for (i, det) in p.detections.iter().enumerate() {
                if !ids.contains(det.image_id.as_str()) {
                    return Err(violation(
                        "detection references known image",
                        format!("{ctx}: detections[{i}] references unknown image {:?}", det.image_id),
                    ));
                }
                if !(0.0..=1.0).contains(&det.confidence) {
                    return Err(violation(
                        "confidence in [0, 1]",
                        format!("{ctx}: detections[{i}] confidence {}", det.confidence),
                    ));
                }
                if !det.bbox.is_valid() {
                    return Err(violation("box validity", format!("{ctx}: detections[{i}]")));
                }
            }
            for (i, gt) in p.ground_truth.iter().enumerate() {
                if !ids.contains(gt.image_id.as_str()) {
                    return Err(violation(
                        "ground truth references known image",
                        format!("{ctx}: ground_truth[{i}] references unknown image {:?}", gt.image_id),
                    ));
                }
                if !gt.bbox.is_valid() {
                    return Err(violation("box validity", format!("{ctx}: ground_truth[{i}]")));
                }
            }
        }
        if baseline_count > 1 {
            return Err(violation(
                "at most one baseline prediction set",
                format!("found {baseline_count} baseline sets"),
            ));
        }

        let mut seen_activities: BTreeSet<(ProcessKind, &str)> = BTreeSet::new();
        for (ri, r) in self.manual_reviews.iter().enumerate() {
            let ctx = format!("manual_reviews[{ri}] ({})", r.activity_id);
            if let Some(score) = r.score {
                if !(0.0..=100.0).contains(&score) {
                    return Err(violation("review score in [0, 100]", format!("{ctx}: score {score}")));
                }
            }
            if r.as_given && r.score.is_none() {
                return Err(violation(
                    "as_given review carries a score",
                    format!("{ctx}: as_given without a score"),
                ));
            }
            if !seen_activities.insert((r.process, r.activity_id.as_str())) {
                return Err(violation(
                    "unique activity per process",
                    format!("{ctx}: duplicate review for {:?}/{}", r.process, r.activity_id),
                ));
            }
        }

        if let Some(r) = &self.resource_samples {
            if r.latency_ms.iter().any(|l| !l.is_finite() || *l < 0.0) {
                return Err(violation("non-negative latency samples", "resources.latency_ms"));
            }
            if !r.peak_memory_mb.is_finite() || r.peak_memory_mb < 0.0 {
                return Err(violation("non-negative peak memory", "resources.peak_memory_mb"));
            }
        }

        if let Some(u) = &self.uncertainty {
            let (low, high) = u.ambiguous_band;
            let fractions = [u.confidence_threshold, low, high];
            if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
                return Err(violation("uncertainty fractions in [0, 1]", "uncertainty"));
            }
            if low > high {
                return Err(violation(
                    "ambiguous band ordered",
                    format!("uncertainty.ambiguous_band: low {low} > high {high}"),
                ));
            }
        }

        self.manifest.validate().map_err(|e| violation("manifest", e.to_string()))?;
        Ok(())
    }
}

/// Parses and fully validates a bundle from JSON text. The stored checksum,
/// when present, is compared against the recomputed one; the returned bundle
/// always carries the computed checksum.
pub fn parse_evidence_bundle(text: &str) -> Result<EvidenceBundle, IngestError> {
    let mut bundle: EvidenceBundle =
        serde_json::from_str(text).map_err(|e| IngestError::Parse { detail: e.to_string() })?;
    bundle.validate()?;
    let computed = bundle.compute_checksum();
    if let Some(stored) = &bundle.bundle_checksum {
        if *stored != computed {
            return Err(IngestError::ChecksumMismatch { stored: stored.clone(), computed });
        }
    }
    bundle.bundle_checksum = Some(computed);
    Ok(bundle)
}

/// Loads a bundle from a file.
pub fn load_evidence_bundle(path: &Path) -> Result<EvidenceBundle, IngestError> {
    let text = std::fs::read_to_string(path)?;
    parse_evidence_bundle(&text)
}

/// One line of the evidence-coverage report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub category: CheckCategory,
    pub assessable: bool,
    pub reason: String,
}

/// Reports, per check category, whether the bundle carries the evidence the
/// category needs at validation level `v`. Absence is reported, never fatal.
pub fn validate_evidence_coverage(b: &EvidenceBundle, v: ValidationLevel) -> Vec<CoverageEntry> {
    let mut entries = Vec::with_capacity(4);

    let integrity = match b.integrity_summary() {
        Some(d) if d.sample_count > 0 => (true, format!("{:?} dataset summary present", d.split)),
        Some(_) => (false, "dataset summary has zero samples".to_string()),
        None => (false, "no train or test dataset summary".to_string()),
    };
    entries.push(CoverageEntry {
        category: CheckCategory::DataIntegrity,
        assessable: integrity.0,
        reason: integrity.1,
    });

    let train_test = if !v.runs_drift_checks() {
        (false, format!("drift checks not run at {v}"))
    } else {
        match (b.summary_for(DatasetSplit::Train), b.summary_for(DatasetSplit::Test)) {
            (Some(_), Some(_)) => (true, "train and test summaries present".to_string()),
            (None, _) => (false, "no train dataset summary".to_string()),
            (_, None) => (false, "no test dataset summary".to_string()),
        }
    };
    entries.push(CoverageEntry {
        category: CheckCategory::TrainTest,
        assessable: train_test.0,
        reason: train_test.1,
    });

    let performance = match b.baseline_predictions() {
        Some(p) if !p.ground_truth.is_empty() => {
            (true, "baseline prediction set with ground truth present".to_string())
        }
        Some(_) => (false, "baseline prediction set has no ground truth".to_string()),
        None => (false, "no baseline prediction set".to_string()),
    };
    entries.push(CoverageEntry {
        category: CheckCategory::ModelPerformance,
        assessable: performance.0,
        reason: performance.1,
    });

    let resource = match &b.resource_samples {
        Some(r) if !r.latency_ms.is_empty() => (true, "resource samples present".to_string()),
        Some(_) => (false, "resource samples have no latency measurements".to_string()),
        None => (false, "no resource samples".to_string()),
    };
    entries.push(CoverageEntry {
        category: CheckCategory::Resource,
        assessable: resource.0,
        reason: resource.1,
    });

    entries
}
