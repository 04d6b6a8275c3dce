//! Property tests over randomized inputs, cross-checked against the
//! independent reference implementations in `common`.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use aircert::checks::stats;
use aircert::evidence::{
    parse_evidence_bundle, BoundingBox, Detection, GroundTruthBox, PerturbationCondition,
    PredictionSet,
};
use aircert::ledger::ArtifactChange;
use aircert::metrics::{average_precision, evaluate_performance, match_detections};
use aircert::scoring::{certification_verdict, round_tenths};
use aircert::weights::{resolve_weight_profile, VerdictThresholds, WeightRegistry};
use aircert::{parse_classification, CheckConfig};

fn arb_label() -> impl Strategy<Value = String> {
    prop_oneof![Just("tank".to_string()), Just("truck".to_string())]
}

fn arb_image() -> impl Strategy<Value = String> {
    prop_oneof![Just("i0".to_string()), Just("i1".to_string())]
}

fn arb_box() -> impl Strategy<Value = BoundingBox> {
    (0u8..12, 0u8..12, 1u8..10, 1u8..10).prop_map(|(x, y, w, h)| {
        BoundingBox::new(x as f64, y as f64, (x + w) as f64, (y + h) as f64)
    })
}

fn arb_detection() -> impl Strategy<Value = Detection> {
    (arb_image(), arb_label(), 0u8..=100, arb_box()).prop_map(|(image_id, label, c, bbox)| {
        Detection { image_id, label, confidence: c as f64 / 100.0, bbox }
    })
}

fn arb_ground_truth() -> impl Strategy<Value = GroundTruthBox> {
    (arb_image(), arb_label(), arb_box())
        .prop_map(|(image_id, label, bbox)| GroundTruthBox { image_id, label, bbox })
}

fn arb_instance() -> impl Strategy<Value = (Vec<Detection>, Vec<GroundTruthBox>, f64)> {
    (
        prop::collection::vec(arb_detection(), 0..=6),
        prop::collection::vec(arb_ground_truth(), 0..=4),
        1u8..=10,
    )
        .prop_map(|(d, g, t)| (d, g, t as f64 / 10.0))
}

fn set_from(detections: Vec<Detection>, ground_truth: Vec<GroundTruthBox>) -> PredictionSet {
    let mut image_ids: Vec<String> = detections
        .iter()
        .map(|d| d.image_id.clone())
        .chain(ground_truth.iter().map(|g| g.image_id.clone()))
        .collect();
    image_ids.sort();
    image_ids.dedup();
    PredictionSet {
        run_id: "prop".to_string(),
        condition: PerturbationCondition::Baseline,
        detections,
        ground_truth,
        image_ids,
    }
}

proptest! {
    #[test]
    fn matching_agrees_with_oracle((detections, ground_truth, threshold) in arb_instance()) {
        let ours = match_detections(&detections, &ground_truth, threshold);
        let reference = common::oracle_match(&detections, &ground_truth, threshold);
        prop_assert_eq!(ours.per_class.len(), reference.len());
        for (label, class) in &ours.per_class {
            let expected = &reference[label];
            prop_assert_eq!((class.tp, class.fp, class.fn_count),
                (expected.tp, expected.fp, expected.fn_count), "class {}", label);
            prop_assert_eq!(&class.scored_detections, &expected.ranked, "class {}", label);
            let ap = average_precision(&class.scored_detections, class.gt_count);
            let reference_ap = common::oracle_ap(&expected.ranked, expected.gt_count);
            prop_assert_eq!(ap, reference_ap, "AP for class {}", label);
        }
    }

    #[test]
    fn metrics_stay_in_unit_range((detections, ground_truth, threshold) in arb_instance()) {
        prop_assume!(!ground_truth.is_empty());
        let set = set_from(detections, ground_truth);
        let m = evaluate_performance(&set, threshold).unwrap();
        for v in [m.precision, m.recall, m.f1, m.map_50] {
            prop_assert!((0.0..=1.0).contains(&v), "metric {v}");
        }
        for ap in m.per_class_ap.values() {
            prop_assert!((0.0..=1.0).contains(ap));
        }
    }

    #[test]
    fn adding_a_false_positive_never_helps((detections, ground_truth, threshold) in arb_instance()) {
        prop_assume!(!ground_truth.is_empty());
        let set = set_from(detections.clone(), ground_truth.clone());
        let before = evaluate_performance(&set, threshold).unwrap();

        // A detection in a fresh image overlaps nothing: always a false positive.
        let mut with_fp = detections;
        with_fp.push(Detection {
            image_id: "fp-island".to_string(),
            label: "tank".to_string(),
            confidence: 0.55,
            bbox: BoundingBox::new(500.0, 500.0, 510.0, 510.0),
        });
        let set = set_from(with_fp, ground_truth);
        let after = evaluate_performance(&set, threshold).unwrap();
        prop_assert!(after.precision <= before.precision + 1e-12);
        prop_assert!(after.map_50 <= before.map_50 + 1e-12);
    }

    #[test]
    fn matching_an_unmatched_gt_never_hurts_recall((detections, ground_truth, threshold) in arb_instance()) {
        prop_assume!(!ground_truth.is_empty());
        let set = set_from(detections.clone(), ground_truth.clone());
        let before = evaluate_performance(&set, threshold).unwrap();

        let matches = match_detections(&detections, &ground_truth, threshold);
        let unmatched_exists = matches.per_class.values().any(|c| c.fn_count > 0);
        prop_assume!(unmatched_exists);

        // Find one unmatched ground truth by re-deriving the match and add a
        // top-confidence detection exactly on it.
        let reference = common::oracle_match(&detections, &ground_truth, threshold);
        let target = ground_truth
            .iter()
            .find(|g| reference[&g.label].fn_count > 0)
            .expect("some class has an unmatched ground truth");
        let mut with_tp = detections;
        with_tp.push(Detection {
            image_id: target.image_id.clone(),
            label: target.label.clone(),
            confidence: 1.0,
            bbox: target.bbox,
        });
        let set = set_from(with_tp, ground_truth);
        let after = evaluate_performance(&set, threshold).unwrap();
        prop_assert!(after.recall >= before.recall - 1e-12,
            "recall {} -> {}", before.recall, after.recall);
    }

    #[test]
    fn permuting_distinct_confidences_changes_nothing(
        (detections, ground_truth, threshold) in arb_instance(),
        seed in any::<u64>(),
    ) {
        prop_assume!(!ground_truth.is_empty());
        // Force distinct confidences, keyed to input order.
        let mut detections = detections;
        for (i, d) in detections.iter_mut().enumerate() {
            d.confidence = 0.9 - i as f64 * 0.03;
        }
        let before = evaluate_performance(&set_from(detections.clone(), ground_truth.clone()), threshold).unwrap();

        // Deterministic pseudo-shuffle from the seed.
        let mut shuffled = detections;
        let n = shuffled.len();
        if n > 1 {
            let mut state = seed | 1;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
        }
        let after = evaluate_performance(&set_from(shuffled, ground_truth), threshold).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn psi_is_nonnegative_and_identity_only_at_equality(
        (reference, current) in (2usize..8).prop_flat_map(|n| (
            prop::collection::vec(0u32..100, n),
            prop::collection::vec(0u32..100, n),
        )),
    ) {
        prop_assume!(reference.iter().sum::<u32>() > 0 && current.iter().sum::<u32>() > 0);
        let to_props = |v: &[u32]| -> Vec<f64> {
            let total: u32 = v.iter().sum();
            v.iter().map(|c| *c as f64 / total as f64).collect()
        };
        let p = to_props(&reference);
        let q = to_props(&current);
        let epsilon = 1e-4;
        let value = stats::psi_proportions(&p, &q, epsilon);
        prop_assert!(value >= 0.0);
        prop_assert!((value - common::oracle_psi(&p, &q, epsilon)).abs() < 1e-12);

        prop_assert_eq!(stats::psi_proportions(&p, &p, epsilon), 0.0);
        // Zero only when the floored, renormalized proportions coincide.
        let floored = |v: &[f64]| -> Vec<f64> {
            let raised: Vec<f64> = v.iter().map(|x| x.max(epsilon)).collect();
            let total: f64 = raised.iter().sum();
            raised.iter().map(|x| x / total).collect()
        };
        if floored(&p) != floored(&q) {
            prop_assert!(value > 0.0);
        }
    }

    #[test]
    fn total_variation_is_a_bounded_metric(
        a in prop::collection::btree_map("[a-d]", 0u32..50, 1..5),
        b in prop::collection::btree_map("[a-d]", 0u32..50, 1..5),
        c in prop::collection::btree_map("[a-d]", 0u32..50, 1..5),
    ) {
        let lift = |m: &BTreeMap<String, u32>| -> BTreeMap<String, f64> {
            m.iter().map(|(k, v)| (k.clone(), *v as f64)).collect()
        };
        let (a, b, c) = (lift(&a), lift(&b), lift(&c));
        let ab = stats::total_variation(&a, &b);
        let ba = stats::total_variation(&b, &a);
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - common::oracle_tv(&a, &b)).abs() < 1e-12);
        let ac = stats::total_variation(&a, &c);
        let cb = stats::total_variation(&c, &b);
        prop_assert!(ab <= ac + cb + 1e-12, "triangle: {ab} > {ac} + {cb}");
    }

    #[test]
    fn weighted_total_stays_near_exact_sum(
        raw in prop::collection::vec((0u32..=10000, 1u32..100), 1..10),
    ) {
        let weight_total: u32 = raw.iter().map(|(_, w)| w).sum();
        let values: Vec<f64> = raw.iter().map(|(v, _)| *v as f64 / 100.0).collect();
        let weights: Vec<f64> =
            raw.iter().map(|(_, w)| *w as f64 / weight_total as f64).collect();
        let exact: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
        let rounded: i64 =
            values.iter().zip(&weights).map(|(v, w)| round_tenths(v * w)).sum();
        let total = rounded as f64 / 10.0;
        prop_assert!(
            (exact - total).abs() <= 0.05 * values.len() as f64 + 1e-9,
            "exact {exact} vs rounded-total {total} over {} rows",
            values.len()
        );
    }

    #[test]
    fn scaling_preserves_the_leading_process(
        activity_values in prop::collection::vec(0u32..=10000, 8),
        k in 1u32..=1000,
    ) {
        // Two processes, four activities each, equal weights.
        let k = k as f64 / 1000.0;
        let score = |values: &[u32], scale: f64| -> f64 {
            values.iter().map(|v| 0.25 * (*v as f64 / 100.0) * scale).sum()
        };
        let a_before = score(&activity_values[..4], 1.0);
        let b_before = score(&activity_values[4..], 1.0);
        prop_assume!((a_before - b_before).abs() > 1e-6);
        let a_after = score(&activity_values[..4], k);
        let b_after = score(&activity_values[4..], k);
        prop_assert_eq!(a_before > b_before, a_after > b_after);
    }

    #[test]
    fn verdict_is_monotone_in_score(s1 in 0.0f64..=100.0, s2 in 0.0f64..=100.0) {
        let thresholds = VerdictThresholds { high: 75.0, moderate: 60.0 };
        let (low, high) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let v_low = certification_verdict(low, thresholds).verdict;
        let v_high = certification_verdict(high, thresholds).verdict;
        prop_assert!(v_low <= v_high);
    }

    #[test]
    fn loader_is_total_over_arbitrary_bytes(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_evidence_bundle(&text);
    }

    #[test]
    fn loader_is_total_over_json_shaped_text(value in arb_json(3)) {
        let _ = parse_evidence_bundle(&value.to_string());
    }

    #[test]
    fn random_registries_resolve_to_valid_profiles(
        category_raw in prop::collection::vec(1u32..=100, 4),
        process_raw in prop::collection::vec(1u32..=100, 4),
        activity_raw in prop::collection::vec(1u32..=100, 3),
    ) {
        let registry = registry_from(&category_raw, &process_raw, &activity_raw);
        let registry = WeightRegistry::from_json(&registry).unwrap();
        let c = parse_classification("D/2A/3").unwrap();
        let profile = resolve_weight_profile(&c, &registry).unwrap();

        let sum: f64 = profile.category_weights.values().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        for w in profile.category_weights.values() {
            prop_assert!((0.0..=1.0).contains(w));
        }
        // Ratio preservation between normalized and raw category weights.
        let cats: Vec<_> = profile.category_weights.keys().copied().collect();
        for pair in cats.windows(2) {
            let raw_ratio =
                profile.raw_category_weights[&pair[0]] / profile.raw_category_weights[&pair[1]];
            let norm_ratio =
                profile.category_weights[&pair[0]] / profile.category_weights[&pair[1]];
            prop_assert!((raw_ratio - norm_ratio).abs() < 1e-12);
        }
        for weights in profile.activity_weights.values() {
            let sum: f64 = weights.iter().map(|a| a.weight).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn suite_scores_stay_in_range(
        scale in 1u64..=5,
        missing in 0u64..=20,
        drop_resources in any::<bool>(),
        drop_perturbed in any::<bool>(),
    ) {
        let mut bundle = aircert::fixtures::full_bundle();
        if let Some(train) = bundle.dataset_summaries.get_mut(0) {
            for feature in &mut train.feature_summaries {
                for count in &mut feature.bin_counts {
                    *count *= scale;
                }
                for row in feature.label_bin_counts.values_mut() {
                    for count in row {
                        *count *= scale;
                    }
                }
                for count in feature.category_counts.values_mut() {
                    *count *= scale;
                }
            }
            for count in train.class_counts.values_mut() {
                *count *= scale;
            }
            train.sample_count *= scale;
            train.missing_label_count = missing.min(train.sample_count);
        }
        if drop_resources {
            bundle.resource_samples = None;
        }
        if drop_perturbed {
            bundle.prediction_sets.retain(|p| p.condition.is_baseline());
        }
        bundle.bundle_checksum = Some(bundle.compute_checksum());

        let c = parse_classification("D/2A/3").unwrap();
        let profile = resolve_weight_profile(&c, &WeightRegistry::builtin()).unwrap();
        let cfg = CheckConfig::default();
        let report = aircert::run_check_suite(&bundle, &c, &profile, &cfg).unwrap();
        prop_assert!((0.0..=100.0).contains(&report.suite_score));
        prop_assert!((0.0..=1.0).contains(&report.auto_pass_fraction));
        for cs in &report.category_scores {
            prop_assert!((0.0..=1.0).contains(&cs.score));
            for check in &cs.check_results {
                prop_assert!((0.0..=1.0).contains(&check.score), "{}", check.check_id);
                let threshold = check.measurements["pass_threshold"];
                prop_assert_eq!(check.passed, check.score >= threshold, "{}", check.check_id);
            }
        }
        // Determinism: identical inputs, identical report bytes.
        let again = aircert::run_check_suite(&bundle, &c, &profile, &cfg).unwrap();
        prop_assert_eq!(
            aircert::canonical::to_canonical_json(&report).unwrap(),
            aircert::canonical::to_canonical_json(&again).unwrap()
        );
    }

    #[test]
    fn drift_trigger_is_strictly_greater(numerator in 1u32..=1023) {
        // Dyadic mass shift: TV between [0.5, 0.5] and [0.5 - x, 0.5 + x]
        // is exactly x for x = numerator / 2048.
        let x = numerator as f64 / 2048.0;
        let reference: BTreeMap<String, f64> =
            [("a".to_string(), 0.5), ("b".to_string(), 0.5)].into_iter().collect();
        let window: BTreeMap<String, f64> =
            [("a".to_string(), 0.5 - x), ("b".to_string(), 0.5 + x)].into_iter().collect();
        let tv = stats::total_variation(&reference, &window);
        prop_assert_eq!(tv, x);

        let mut baseline = aircert::fixtures::monitor_baseline();
        baseline.reference_label_distribution = Some(reference);
        baseline.reference_dataset_summary = None;
        let mut w = aircert::fixtures::healthy_window();
        w.prediction_label_dist = window;

        // Threshold exactly at the observed drift: must not fire.
        let cfg = aircert::TriggerConfig { drift_threshold: x, ..Default::default() };
        let report = aircert::evaluate_triggers(&baseline, &w, &cfg).unwrap();
        prop_assert!(report.fired.is_empty(), "fired at exact threshold {x}");

        // Threshold a hair below: must fire.
        let below = aircert::TriggerConfig {
            drift_threshold: x - 1.0 / 4096.0,
            ..Default::default()
        };
        if below.drift_threshold > 0.0 {
            let report = aircert::evaluate_triggers(&baseline, &w, &below).unwrap();
            prop_assert_eq!(report.fired.len(), 1);
        }
    }

    #[test]
    fn ledger_is_append_only(extra in 1usize..6) {
        let mut ledger = aircert::fixtures::ledger_with_records(5);
        let before: Vec<String> = ledger
            .records()
            .iter()
            .map(|r| aircert::canonical::to_canonical_json(r).unwrap())
            .collect();
        for i in 0..extra {
            ledger
                .record_change(
                    &ArtifactChange {
                        artifact_id: "detector-model".to_string(),
                        new_hash: aircert::canonical::sha256_hex(format!("extra-{i}").as_bytes()),
                        new_descriptor: None,
                        new_label_distribution: None,
                        rationale: format!("extra {i}"),
                    },
                    "2026-04-01T00:00:00Z".parse().unwrap(),
                )
                .unwrap();
        }
        let after: Vec<String> = ledger
            .records()
            .iter()
            .take(before.len())
            .map(|r| aircert::canonical::to_canonical_json(r).unwrap())
            .collect();
        prop_assert_eq!(before, after);
        prop_assert!(ledger.audit().chain_valid);
    }
}

fn arb_json(depth: u32) -> impl Strategy<Value = serde_json::Value> {
    let leaf = prop_oneof![
        Just(serde_json::Value::Null),
        any::<bool>().prop_map(serde_json::Value::from),
        any::<i64>().prop_map(serde_json::Value::from),
        (-1e6f64..1e6).prop_map(serde_json::Value::from),
        "[a-z]{0,8}".prop_map(serde_json::Value::from),
    ];
    leaf.prop_recursive(depth, 24, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(serde_json::Value::from),
            prop::collection::btree_map("[a-z_]{1,12}", inner, 0..4)
                .prop_map(|m| serde_json::Value::Object(m.into_iter().collect())),
        ]
    })
}

fn registry_from(category_raw: &[u32], process_raw: &[u32], activity_raw: &[u32]) -> String {
    let process_total: u32 = process_raw.iter().sum();
    let activity_total: u32 = activity_raw.iter().sum();
    let activities: Vec<serde_json::Value> = activity_raw
        .iter()
        .enumerate()
        .map(|(i, w)| {
            serde_json::json!({
                "id": format!("Activity {i}"),
                "weight": *w as f64 / activity_total as f64,
            })
        })
        .collect();
    serde_json::json!({
        "profiles": [{
            "key": "*/*/*",
            "process_weights": {
                "dev": process_raw[0] as f64 / process_total as f64,
                "vandv": process_raw[1] as f64 / process_total as f64,
                "qa": process_raw[2] as f64 / process_total as f64,
                "cm": process_raw[3] as f64 / process_total as f64,
            },
            "activity_weights": {
                "dev": activities, "vandv": activities, "qa": activities, "cm": activities,
            },
            "category_weights": {
                "data_integrity": category_raw[0] as f64 / 100.0,
                "train_test": category_raw[1] as f64 / 100.0,
                "model_performance": category_raw[2] as f64 / 100.0,
                "resource": category_raw[3] as f64 / 100.0,
            },
        }]
    })
    .to_string()
}

/// Serializing a structurally rich bundle and reloading it yields equality.
#[test]
fn bundle_round_trip_over_fixtures() {
    for bundle in [
        aircert::fixtures::empty_bundle("E/1B/2"),
        aircert::fixtures::table1_bundle(),
        aircert::fixtures::full_bundle(),
    ] {
        let json = bundle.to_canonical_json();
        let reloaded = parse_evidence_bundle(&json).unwrap();
        assert_eq!(bundle, reloaded);
    }
}
