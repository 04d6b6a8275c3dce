//! Deterministic example inputs.
//!
//! These builders produce the bundles shipped under `fixtures/` and drive the
//! test suite. The perturbed prediction sets are constructed class by class
//! so the aggregate metrics land on known values: per class, true positives
//! outrank all false positives, making each class AP equal its recall.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};

use crate::canonical::sha256_hex;
use crate::classification::ProcessKind;
use crate::config::CheckConfig;
use crate::evidence::{
    BoundingBox, DatasetSplit, DatasetSummary, Detection, EvidenceBundle, FeatureKind,
    FeatureSummary, GroundTruthBox, ManualReviewRecord, PerturbationCondition, PredictionSet,
    ResourceSamples, ReviewLayer, UncertaintyConfig,
};
use crate::ledger::{ArtifactChange, ArtifactKind, ArtifactManifest, Ledger, ManifestEntry};
use crate::monitor::{MonitorBaseline, OperationalWindow};
use crate::report::build_assurance_profile;
use crate::weights::WeightRegistry;

/// Timestamp stamped into generated fixtures.
pub const FIXTURE_CLOCK: &str = "2026-01-15T12:00:00Z";

pub fn fixture_clock() -> DateTime<Utc> {
    FIXTURE_CLOCK.parse().expect("fixture clock parses")
}

fn review(
    process: ProcessKind,
    activity_id: &str,
    layer: ReviewLayer,
    score: f64,
    as_given: bool,
    rationale: &str,
) -> ManualReviewRecord {
    ManualReviewRecord {
        process,
        activity_id: activity_id.to_string(),
        layer,
        score: Some(score),
        reviewer: "review-board".to_string(),
        rationale: rationale.to_string(),
        as_given,
    }
}

/// Manifest shared by the shipped bundles.
pub fn fixture_manifest() -> ArtifactManifest {
    ArtifactManifest {
        entries: vec![
            ManifestEntry {
                artifact_id: "detector-model".to_string(),
                kind: ArtifactKind::Model,
                content_hash: sha256_hex(b"fixture:detector-model:v1"),
                descriptor: [
                    ("architecture".to_string(), "single-stage-detector".to_string()),
                    ("version".to_string(), "1.2.0".to_string()),
                ]
                .into_iter()
                .collect(),
                label_distribution: None,
            },
            ManifestEntry {
                artifact_id: "training-dataset".to_string(),
                kind: ArtifactKind::Dataset,
                content_hash: sha256_hex(b"fixture:training-dataset:v1"),
                descriptor: [("source".to_string(), "field-collection-2025-q3".to_string())]
                    .into_iter()
                    .collect(),
                label_distribution: Some(
                    [
                        ("tank".to_string(), 0.45),
                        ("truck".to_string(), 0.30),
                        ("car".to_string(), 0.25),
                    ]
                    .into_iter()
                    .collect(),
                ),
            },
            ManifestEntry {
                artifact_id: "operator-interface".to_string(),
                kind: ArtifactKind::Interface,
                content_hash: sha256_hex(b"fixture:operator-interface:v1"),
                descriptor: [("hmi_version".to_string(), "3.1".to_string())].into_iter().collect(),
                label_distribution: None,
            },
            ManifestEntry {
                artifact_id: "uncertainty-policy".to_string(),
                kind: ArtifactKind::Uncertainty,
                content_hash: sha256_hex(b"fixture:uncertainty-policy:v1"),
                descriptor: [("confidence_threshold".to_string(), "0.5".to_string())]
                    .into_iter()
                    .collect(),
                label_distribution: None,
            },
        ],
    }
}

/// A bundle with nothing but a classification and manifest.
pub fn empty_bundle(classification: &str) -> EvidenceBundle {
    let mut bundle = EvidenceBundle {
        classification_text: classification.to_string(),
        dataset_summaries: vec![],
        prediction_sets: vec![],
        manual_reviews: vec![],
        resource_samples: None,
        uncertainty: None,
        manifest: fixture_manifest(),
        bundle_checksum: None,
    };
    bundle.bundle_checksum = Some(bundle.compute_checksum());
    bundle
}

/// The reference scoring fixture: fourteen as-given review scores whose
/// weighted table lands on a 74.7 final score at D/2A/3.
pub fn table1_bundle() -> EvidenceBundle {
    let manual_reviews = vec![
        review(ProcessKind::Dev, "Dataset Quality", ReviewLayer::Ml, 80.0, true,
            "diverse imagery; some metadata lacks lighting and weather detail"),
        review(ProcessKind::Dev, "Model Documentation", ReviewLayer::Ml, 82.0, true,
            "architecture and hyperparameters recorded; training runs reproducible"),
        review(ProcessKind::Dev, "Integration Documentation", ReviewLayer::Ml, 70.0, true,
            "interface specs present; data-flow mapping incomplete"),
        review(ProcessKind::VandV, "Model Performance", ReviewLayer::Ml, 95.0, true,
            "headline metrics met requirements across operational scenarios"),
        review(ProcessKind::VandV, "Robustness Testing", ReviewLayer::Ml, 92.0, true,
            "minor degradation under noise and blur, within tolerance"),
        review(ProcessKind::VandV, "Dataset Certification", ReviewLayer::Ml, 84.8, true,
            "image property outliers found; distribution otherwise consistent"),
        review(ProcessKind::VandV, "System Integration", ReviewLayer::Base, 88.0, true,
            "interfaces verified end to end on the bench rig"),
        review(ProcessKind::VandV, "Human Factors", ReviewLayer::HumanFactors, 87.0, true,
            "operators completed simulated tasks with reduced workload"),
        review(ProcessKind::Qa, "Post-Certification Monitoring", ReviewLayer::Ml, 55.0, true,
            "monitoring plan drafted but not yet exercised; label drift observed"),
        review(ProcessKind::Qa, "Usability Assessment", ReviewLayer::HumanFactors, 52.0, true,
            "operators struggled to interpret outputs in fast-changing scenes"),
        review(ProcessKind::Qa, "Audits and Reviews", ReviewLayer::Base, 50.0, true,
            "audit cadence not yet established"),
        review(ProcessKind::Cm, "Version Control", ReviewLayer::Base, 65.0, true,
            "model and dataset versions tracked; interface assets lag behind"),
        review(ProcessKind::Cm, "Configuration Identification", ReviewLayer::Base, 60.0, true,
            "baseline identified; some auxiliary assets unlabeled"),
        review(ProcessKind::Cm, "Change Management", ReviewLayer::Base, 58.0, true,
            "no structured post-certification update procedure yet"),
    ];
    let mut bundle = EvidenceBundle {
        classification_text: "D/2A/3".to_string(),
        dataset_summaries: vec![],
        prediction_sets: vec![],
        manual_reviews,
        resource_samples: None,
        uncertainty: None,
        manifest: fixture_manifest(),
        bundle_checksum: None,
    };
    bundle.bundle_checksum = Some(bundle.compute_checksum());
    bundle
}

/// Per-class construction plan for a prediction set.
#[derive(Debug, Clone, Copy)]
pub struct ClassPlan {
    pub label: &'static str,
    pub gt_count: usize,
    pub tp_count: usize,
    pub fp_count: usize,
}

fn gt_box(class_index: usize, i: usize) -> BoundingBox {
    let x0 = 16.0 * (i % 8) as f64 + 2.0 * class_index as f64;
    let y0 = 14.0 * ((i / 8) % 8) as f64;
    let w = 24.0 + (i % 5) as f64 * 3.0;
    let h = 20.0 + (i % 7) as f64 * 2.0;
    BoundingBox::new(x0, y0, x0 + w, y0 + h)
}

/// Builds a prediction set where, per class, the first `tp_count` ground
/// truths are detected almost exactly (high confidence) and false positives
/// sit in detection-only images at low confidence. With true positives
/// outranking false positives, each class AP equals `tp / gt` and the micro
/// precision and recall are exact count ratios.
pub fn prediction_set(
    run_id: &str,
    condition: PerturbationCondition,
    plan: &[ClassPlan],
) -> PredictionSet {
    let mut detections = Vec::new();
    let mut ground_truth = Vec::new();
    let mut image_ids = Vec::new();

    for (ci, class) in plan.iter().enumerate() {
        for i in 0..class.gt_count {
            let image_id = format!("img_{}_{i:03}", class.label);
            image_ids.push(image_id.clone());
            let bbox = gt_box(ci, i);
            ground_truth.push(GroundTruthBox {
                image_id: image_id.clone(),
                label: class.label.to_string(),
                bbox,
            });
            if i < class.tp_count {
                detections.push(Detection {
                    image_id,
                    label: class.label.to_string(),
                    confidence: 0.95 - i as f64 * 0.0015,
                    bbox: BoundingBox::new(
                        bbox.x_min + 0.5,
                        bbox.y_min + 0.5,
                        bbox.x_max + 0.5,
                        bbox.y_max + 0.5,
                    ),
                });
            }
        }
        for j in 0..class.fp_count {
            let image_id = format!("img_{}_fp_{j:02}", class.label);
            image_ids.push(image_id.clone());
            detections.push(Detection {
                image_id,
                label: class.label.to_string(),
                confidence: 0.30 - j as f64 * 0.0015,
                bbox: BoundingBox::new(300.0 + j as f64, 300.0, 340.0 + j as f64, 335.0),
            });
        }
    }
    // Ground-truth images can repeat across classes only if labels collide;
    // ids are namespaced per class so the list is already unique.
    PredictionSet {
        run_id: run_id.to_string(),
        condition,
        detections,
        ground_truth,
        image_ids,
    }
}

/// Baseline run: class recalls 0.82 / 0.85 / 0.88, mAP 0.85.
pub fn baseline_plan() -> Vec<ClassPlan> {
    vec![
        ClassPlan { label: "tank", gt_count: 100, tp_count: 82, fp_count: 8 },
        ClassPlan { label: "truck", gt_count: 20, tp_count: 17, fp_count: 3 },
        ClassPlan { label: "car", gt_count: 25, tp_count: 22, fp_count: 2 },
    ]
}

/// Noise-perturbed run: precision 109/138, recall 109/145, mAP
/// (0.70 + 0.85 + 0.88) / 3 = 0.81.
pub fn noise_plan() -> Vec<ClassPlan> {
    vec![
        ClassPlan { label: "tank", gt_count: 100, tp_count: 70, fp_count: 20 },
        ClassPlan { label: "truck", gt_count: 20, tp_count: 17, fp_count: 5 },
        ClassPlan { label: "car", gt_count: 25, tp_count: 22, fp_count: 4 },
    ]
}

fn occlusion_plan() -> Vec<ClassPlan> {
    vec![
        ClassPlan { label: "tank", gt_count: 100, tp_count: 77, fp_count: 10 },
        ClassPlan { label: "truck", gt_count: 20, tp_count: 17, fp_count: 2 },
        ClassPlan { label: "car", gt_count: 25, tp_count: 21, fp_count: 2 },
    ]
}

fn motion_blur_plan() -> Vec<ClassPlan> {
    vec![
        ClassPlan { label: "tank", gt_count: 100, tp_count: 80, fp_count: 12 },
        ClassPlan { label: "truck", gt_count: 20, tp_count: 16, fp_count: 3 },
        ClassPlan { label: "car", gt_count: 25, tp_count: 20, fp_count: 3 },
    ]
}

fn numeric_feature(
    name: &str,
    edges: Vec<f64>,
    counts: Vec<u64>,
    joint: Option<BTreeMap<String, Vec<u64>>>,
) -> FeatureSummary {
    FeatureSummary {
        name: name.to_string(),
        kind: FeatureKind::Numeric,
        bin_edges: edges,
        bin_counts: counts,
        category_counts: BTreeMap::new(),
        label_bin_counts: joint.unwrap_or_default(),
    }
}

fn categorical_feature(name: &str, counts: &[(&str, u64)]) -> FeatureSummary {
    FeatureSummary {
        name: name.to_string(),
        kind: FeatureKind::Categorical,
        bin_edges: vec![],
        bin_counts: vec![],
        category_counts: counts.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        label_bin_counts: BTreeMap::new(),
    }
}

/// Training-split summary used by the full fixture.
pub fn train_summary() -> DatasetSummary {
    DatasetSummary {
        split: DatasetSplit::Train,
        class_counts: [
            ("tank".to_string(), 180u64),
            ("truck".to_string(), 120),
            ("car".to_string(), 100),
        ]
        .into_iter()
        .collect(),
        feature_summaries: vec![
            numeric_feature(
                "brightness",
                vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
                vec![40, 90, 140, 90, 40],
                None,
            ),
            numeric_feature(
                "bbox_area",
                vec![0.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0],
                vec![60, 120, 120, 80, 20],
                Some(
                    [
                        ("tank".to_string(), vec![30, 55, 55, 35, 5]),
                        ("truck".to_string(), vec![20, 35, 35, 25, 5]),
                        ("car".to_string(), vec![10, 30, 30, 20, 10]),
                    ]
                    .into_iter()
                    .collect(),
                ),
            ),
            categorical_feature("weather", &[("clear", 250), ("overcast", 100), ("rain", 50)]),
        ],
        sample_count: 400,
        missing_label_count: 4,
        metadata: [("capture_platform".to_string(), "airborne-eo".to_string())]
            .into_iter()
            .collect(),
    }
}

fn test_summary() -> DatasetSummary {
    DatasetSummary {
        split: DatasetSplit::Test,
        class_counts: [
            ("tank".to_string(), 65u64),
            ("truck".to_string(), 45),
            ("car".to_string(), 35),
        ]
        .into_iter()
        .collect(),
        feature_summaries: vec![
            numeric_feature(
                "brightness",
                vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
                vec![16, 32, 50, 32, 15],
                None,
            ),
            numeric_feature(
                "bbox_area",
                vec![0.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0],
                vec![22, 44, 43, 29, 7],
                None,
            ),
            categorical_feature("weather", &[("clear", 90), ("overcast", 37), ("rain", 18)]),
        ],
        sample_count: 145,
        missing_label_count: 1,
        metadata: BTreeMap::new(),
    }
}

/// The complete evidence fixture: two dataset summaries, a baseline plus
/// three perturbed prediction sets, resource samples, an uncertainty policy
/// and a full review set with blended V&V activities.
pub fn full_bundle() -> EvidenceBundle {
    let manual_reviews = vec![
        review(ProcessKind::Dev, "Dataset Quality", ReviewLayer::Ml, 88.0, true,
            "coverage across lighting and weather verified"),
        review(ProcessKind::Dev, "Model Documentation", ReviewLayer::Ml, 84.0, false,
            "configuration reports current"),
        review(ProcessKind::Dev, "Integration Documentation", ReviewLayer::Ml, 78.0, false,
            "tactical display data flow documented"),
        review(ProcessKind::VandV, "Model Performance", ReviewLayer::Ml, 90.0, false,
            "metrics reviewed against requirements"),
        review(ProcessKind::VandV, "Robustness Testing", ReviewLayer::Ml, 85.0, false,
            "perturbation campaign reviewed"),
        review(ProcessKind::VandV, "Dataset Certification", ReviewLayer::Ml, 82.0, false,
            "drift analysis reviewed"),
        review(ProcessKind::VandV, "System Integration", ReviewLayer::Base, 88.0, false,
            "bench integration verified"),
        review(ProcessKind::VandV, "Human Factors", ReviewLayer::HumanFactors, 86.0, false,
            "simulator sessions completed"),
        review(ProcessKind::Qa, "Post-Certification Monitoring", ReviewLayer::Ml, 72.0, true,
            "monitoring plan exercised in shadow mode"),
        review(ProcessKind::Qa, "Usability Assessment", ReviewLayer::HumanFactors, 70.0, true,
            "operator feedback incorporated"),
        review(ProcessKind::Qa, "Audits and Reviews", ReviewLayer::Base, 75.0, true,
            "quarterly audit cadence in place"),
        review(ProcessKind::Cm, "Version Control", ReviewLayer::Base, 80.0, true,
            "all artifacts content-addressed"),
        review(ProcessKind::Cm, "Configuration Identification", ReviewLayer::Base, 75.0, true,
            "baseline registered in the ledger"),
        review(ProcessKind::Cm, "Change Management", ReviewLayer::Base, 72.0, true,
            "change records chained and audited"),
    ];

    let mut bundle = EvidenceBundle {
        classification_text: "D/2A/3".to_string(),
        dataset_summaries: vec![train_summary(), test_summary()],
        prediction_sets: vec![
            prediction_set("run-baseline", PerturbationCondition::Baseline, &baseline_plan()),
            prediction_set("run-noise", PerturbationCondition::Noise, &noise_plan()),
            prediction_set("run-occlusion", PerturbationCondition::Occlusion, &occlusion_plan()),
            prediction_set(
                "run-motion-blur",
                PerturbationCondition::MotionBlur,
                &motion_blur_plan(),
            ),
        ],
        manual_reviews,
        resource_samples: Some(ResourceSamples {
            latency_ms: (0..24).map(|i| 18.0 + ((i * 7) % 24) as f64 * 1.2).collect(),
            peak_memory_mb: 880.0,
            platform: "embedded-gpu-module".to_string(),
        }),
        uncertainty: Some(UncertaintyConfig {
            confidence_threshold: 0.5,
            ambiguous_band: (0.4, 0.6),
            failsafe_policy: "defer-to-operator".to_string(),
        }),
        manifest: fixture_manifest(),
        bundle_checksum: None,
    };
    bundle.bundle_checksum = Some(bundle.compute_checksum());
    bundle
}

/// Monitoring baseline derived from the reference fixture.
pub fn monitor_baseline() -> MonitorBaseline {
    let profile = build_assurance_profile(
        &table1_bundle(),
        &WeightRegistry::builtin(),
        &CheckConfig::default(),
        fixture_clock(),
    )
    .expect("reference fixture certifies");
    MonitorBaseline {
        assurance_profile: profile,
        reference_label_distribution: Some(
            [
                ("tank".to_string(), 0.5),
                ("truck".to_string(), 0.3),
                ("car".to_string(), 0.2),
            ]
            .into_iter()
            .collect(),
        ),
        reference_dataset_summary: Some(train_summary()),
    }
}

fn window(id: &str, start: &str, end: &str, dist: &[(&str, f64)]) -> OperationalWindow {
    OperationalWindow {
        window_id: id.to_string(),
        period: (start.parse().unwrap(), end.parse().unwrap()),
        metrics: None,
        prediction_label_dist: dist.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        dataset_summary: None,
        environment_tags: BTreeSet::new(),
        uncertainty: None,
    }
}

/// Six-hour window whose prediction mix sits at total variation 0.29 from
/// the reference: below the 0.30 trigger.
pub fn healthy_window() -> OperationalWindow {
    window(
        "window-healthy",
        "2026-02-01T00:00:00Z",
        "2026-02-01T06:00:00Z",
        &[("tank", 0.21), ("truck", 0.39), ("car", 0.40)],
    )
}

/// Window at total variation 0.31: past the trigger.
pub fn drifted_window() -> OperationalWindow {
    window(
        "window-drifted",
        "2026-02-01T06:00:00Z",
        "2026-02-01T12:00:00Z",
        &[("tank", 0.19), ("truck", 0.40), ("car", 0.41)],
    )
}

/// A ledger over the fixture manifest with `n` deterministic change records
/// (model retrains and dataset refreshes, one recertification note midway).
pub fn ledger_with_records(n: usize) -> Ledger {
    let mut ledger = Ledger::register_baseline(fixture_manifest()).expect("fixture manifest valid");
    for i in 0..n {
        let timestamp: DateTime<Utc> = format!("2026-03-{:02}T08:00:00Z", (i % 27) + 1)
            .parse()
            .expect("valid fixture timestamp");
        let change = if i % 3 == 0 {
            ArtifactChange {
                artifact_id: "detector-model".to_string(),
                new_hash: sha256_hex(format!("fixture:detector-model:v{}", i + 2).as_bytes()),
                new_descriptor: None,
                new_label_distribution: None,
                rationale: if i % 6 == 0 && i > 0 {
                    format!("retrain {i}; recertified after targeted drift checks")
                } else {
                    format!("retrain {i}")
                },
            }
        } else {
            ArtifactChange {
                artifact_id: "training-dataset".to_string(),
                new_hash: sha256_hex(format!("fixture:training-dataset:v{}", i + 2).as_bytes()),
                new_descriptor: Some(
                    [("source".to_string(), format!("field-collection-2026-r{i}"))]
                        .into_iter()
                        .collect(),
                ),
                new_label_distribution: Some(
                    [
                        ("tank".to_string(), 0.45 + 0.001 * (i % 5) as f64),
                        ("truck".to_string(), 0.30),
                        ("car".to_string(), 0.25 - 0.001 * (i % 5) as f64),
                    ]
                    .into_iter()
                    .collect(),
                ),
                rationale: format!("dataset refresh {i}"),
            }
        };
        ledger.record_change(&change, timestamp).expect("fixture change applies");
    }
    ledger
}
