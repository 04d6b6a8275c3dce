//! Classification-keyed weight registry.
//!
//! The mapping from a classification triple to concrete process, activity and
//! category weights is declarative: a JSON registry of profiles keyed by
//! patterns like `D/*/*`, where `*` matches any token and the most specific
//! matching key wins. A built-in registry covers criticality levels A-E.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classification::{CheckCategory, Classification, Criticality, ProcessKind};

const DEFAULT_REGISTRY_JSON: &str = include_str!("../assets/default_weights.json");

/// Weight-sum tolerance used everywhere unit sums are required.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// One activity's weight inside a process. Order in the registry is the
/// order activities appear in rendered reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityWeight {
    pub id: String,
    pub weight: f64,
}

/// Score thresholds for the certification verdict: strictly above `high`
/// certifies with high confidence, at or above `moderate` with moderate
/// confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictThresholds {
    pub high: f64,
    pub moderate: f64,
}

impl VerdictThresholds {
    /// Built-in thresholds by criticality: A/B use (85, 70), C/D/E use (75, 60).
    pub fn for_criticality(crit: Criticality) -> Self {
        match crit {
            Criticality::A | Criticality::B => VerdictThresholds { high: 85.0, moderate: 70.0 },
            Criticality::C | Criticality::D | Criticality::E => {
                VerdictThresholds { high: 75.0, moderate: 60.0 }
            }
        }
    }
}

/// Fully resolved weights for one classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    /// Registry key that matched, e.g. `D/*/*`.
    pub source_key: String,
    pub process_weights: BTreeMap<ProcessKind, f64>,
    pub activity_weights: BTreeMap<ProcessKind, Vec<ActivityWeight>>,
    /// Unit-sum category weights (normalized if the raw row was not).
    pub category_weights: BTreeMap<CheckCategory, f64>,
    /// Raw category row as it appeared in the registry, kept for provenance.
    pub raw_category_weights: BTreeMap<CheckCategory, f64>,
    pub verdict_thresholds: VerdictThresholds,
}

impl WeightProfile {
    pub fn activity_weight(&self, process: ProcessKind, activity_id: &str) -> Option<f64> {
        self.activity_weights
            .get(&process)?
            .iter()
            .find(|a| a.id == activity_id)
            .map(|a| a.weight)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RegistryEntry {
    key: String,
    process_weights: BTreeMap<ProcessKind, f64>,
    activity_weights: BTreeMap<ProcessKind, Vec<ActivityWeight>>,
    category_weights: BTreeMap<CheckCategory, f64>,
    #[serde(default)]
    verdict_thresholds: Option<VerdictThresholds>,
}

/// A parsed weight-registry document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightRegistry {
    profiles: Vec<RegistryEntry>,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("registry parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("no weight profile matches classification {0}")]
    NoMatchingProfile(String),
    #[error("invalid weights in profile {key:?}: {detail}")]
    InvalidWeights { key: String, detail: String },
}

impl WeightRegistry {
    /// The built-in registry shipped with the engine.
    pub fn builtin() -> Self {
        serde_json::from_str(DEFAULT_REGISTRY_JSON).expect("built-in weight registry parses")
    }

    pub fn from_json(json: &str) -> Result<Self, RegistryError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Number of concrete (non-`*`) tokens a pattern matches with, or None
/// when the pattern does not match.
fn match_specificity(pattern: &str, c: &Classification) -> Option<usize> {
    let tokens: Vec<&str> = pattern.split('/').collect();
    if tokens.len() != 3 {
        return None;
    }
    let actual = [
        c.crit.as_str().to_string(),
        c.autonomy.as_str().to_string(),
        c.model_complexity.as_number().to_string(),
    ];
    let mut specificity = 0;
    for (pat, act) in tokens.iter().zip(actual.iter()) {
        if *pat == "*" {
            continue;
        }
        if pat.eq_ignore_ascii_case(act) {
            specificity += 1;
        } else {
            return None;
        }
    }
    Some(specificity)
}

fn check_unit_sum(kind: &str, sum: f64, key: &str) -> Result<(), RegistryError> {
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(RegistryError::InvalidWeights {
            key: key.to_string(),
            detail: format!("{kind} weights sum to {sum}, expected 1"),
        });
    }
    Ok(())
}

fn check_range(kind: &str, w: f64, key: &str) -> Result<(), RegistryError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(RegistryError::InvalidWeights {
            key: key.to_string(),
            detail: format!("{kind} weight {w} outside [0, 1]"),
        });
    }
    Ok(())
}

/// Resolves the weight profile for a classification: the most specific
/// matching registry key wins (exact triple, then partial patterns, then a
/// full-wildcard default); ties go to the earlier entry. Category weights are
/// normalized to unit sum when the raw row is not, preserving ratios.
pub fn resolve_weight_profile(
    c: &Classification,
    registry: &WeightRegistry,
) -> Result<WeightProfile, RegistryError> {
    let mut best: Option<(usize, &RegistryEntry)> = None;
    for entry in &registry.profiles {
        if let Some(spec) = match_specificity(&entry.key, c) {
            let better = match best {
                Some((best_spec, _)) => spec > best_spec,
                None => true,
            };
            if better {
                best = Some((spec, entry));
            }
        }
    }
    let (_, entry) =
        best.ok_or_else(|| RegistryError::NoMatchingProfile(c.to_string()))?;
    let key = &entry.key;

    for kind in ProcessKind::ALL {
        if !entry.process_weights.contains_key(&kind) {
            return Err(RegistryError::InvalidWeights {
                key: key.clone(),
                detail: format!("missing process weight for {kind:?}"),
            });
        }
        if !entry.activity_weights.contains_key(&kind) {
            return Err(RegistryError::InvalidWeights {
                key: key.clone(),
                detail: format!("missing activity weights for {kind:?}"),
            });
        }
    }
    for w in entry.process_weights.values() {
        check_range("process", *w, key)?;
    }
    check_unit_sum("process", entry.process_weights.values().sum(), key)?;

    for (kind, activities) in &entry.activity_weights {
        if activities.is_empty() {
            return Err(RegistryError::InvalidWeights {
                key: key.clone(),
                detail: format!("empty activity list for {kind:?}"),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in activities {
            check_range("activity", a.weight, key)?;
            if !seen.insert(a.id.as_str()) {
                return Err(RegistryError::InvalidWeights {
                    key: key.clone(),
                    detail: format!("duplicate activity id {:?} in {kind:?}", a.id),
                });
            }
        }
        check_unit_sum(
            &format!("{kind:?} activity"),
            activities.iter().map(|a| a.weight).sum(),
            key,
        )?;
    }

    for cat in CheckCategory::ALL {
        if !entry.category_weights.contains_key(&cat) {
            return Err(RegistryError::InvalidWeights {
                key: key.clone(),
                detail: format!("missing category weight for {cat:?}"),
            });
        }
    }
    for w in entry.category_weights.values() {
        check_range("category", *w, key)?;
    }
    let raw_sum: f64 = entry.category_weights.values().sum();
    if raw_sum <= 0.0 {
        return Err(RegistryError::InvalidWeights {
            key: key.clone(),
            detail: "category weights sum to zero".to_string(),
        });
    }
    let category_weights: BTreeMap<CheckCategory, f64> =
        if (raw_sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            entry.category_weights.iter().map(|(k, w)| (*k, w / raw_sum)).collect()
        } else {
            entry.category_weights.clone()
        };

    Ok(WeightProfile {
        source_key: key.clone(),
        process_weights: entry.process_weights.clone(),
        activity_weights: entry.activity_weights.clone(),
        category_weights,
        raw_category_weights: entry.category_weights.clone(),
        verdict_thresholds: entry
            .verdict_thresholds
            .unwrap_or_else(|| VerdictThresholds::for_criticality(c.crit)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::parse_classification;

    fn resolve(text: &str) -> WeightProfile {
        let c = parse_classification(text).unwrap();
        resolve_weight_profile(&c, &WeightRegistry::builtin()).unwrap()
    }

    #[test]
    fn level_d_uses_published_weights() {
        let p = resolve("D/2A/3");
        assert_eq!(p.source_key, "D/*/*");
        assert_eq!(p.category_weights[&CheckCategory::DataIntegrity], 0.25);
        assert_eq!(p.category_weights[&CheckCategory::TrainTest], 0.20);
        assert_eq!(p.category_weights[&CheckCategory::ModelPerformance], 0.30);
        assert_eq!(p.category_weights[&CheckCategory::Resource], 0.25);
        assert_eq!(p.process_weights[&ProcessKind::Dev], 0.30);
        assert_eq!(p.process_weights[&ProcessKind::VandV], 0.35);
        assert_eq!(p.process_weights[&ProcessKind::Qa], 0.20);
        assert_eq!(p.process_weights[&ProcessKind::Cm], 0.15);
        assert_eq!(p.activity_weight(ProcessKind::Dev, "Dataset Quality"), Some(0.40));
        assert_eq!(p.verdict_thresholds, VerdictThresholds { high: 75.0, moderate: 60.0 });
    }

    #[test]
    fn high_criticality_row_is_normalized() {
        let p = resolve("A/3A/3");
        let raw: f64 = p.raw_category_weights.values().sum();
        assert!((raw - 1.15).abs() < 1e-12);
        let sum: f64 = p.category_weights.values().sum();
        assert!((sum - 1.0).abs() < WEIGHT_SUM_TOLERANCE);
        assert!((p.category_weights[&CheckCategory::DataIntegrity] - 0.35 / 1.15).abs() < 1e-12);
        assert!((p.category_weights[&CheckCategory::ModelPerformance] - 0.40 / 1.15).abs() < 1e-12);
        // Ratios survive normalization.
        let r_norm = p.category_weights[&CheckCategory::DataIntegrity]
            / p.category_weights[&CheckCategory::Resource];
        let r_raw = p.raw_category_weights[&CheckCategory::DataIntegrity]
            / p.raw_category_weights[&CheckCategory::Resource];
        assert!((r_norm - r_raw).abs() < 1e-12);
    }

    #[test]
    fn empty_registry_has_no_match() {
        let reg = WeightRegistry { profiles: vec![] };
        let c = parse_classification("E/1A/1").unwrap();
        assert!(matches!(
            resolve_weight_profile(&c, &reg),
            Err(RegistryError::NoMatchingProfile(_))
        ));
    }

    #[test]
    fn most_specific_key_wins() {
        let mut reg = WeightRegistry::builtin();
        let mut exact = reg.profiles[3].clone();
        exact.key = "D/2A/3".to_string();
        exact.verdict_thresholds = Some(VerdictThresholds { high: 90.0, moderate: 80.0 });
        // Exact entry listed last still beats the earlier D/*/* entry.
        reg.profiles.push(exact);
        let p = resolve_weight_profile(&parse_classification("D/2A/3").unwrap(), &reg).unwrap();
        assert_eq!(p.source_key, "D/2A/3");
        assert_eq!(p.verdict_thresholds.high, 90.0);
        // Other D classifications still fall back to the wildcard entry.
        let p = resolve_weight_profile(&parse_classification("D/1B/2").unwrap(), &reg).unwrap();
        assert_eq!(p.source_key, "D/*/*");
    }

    #[test]
    fn out_of_range_weight_is_rejected() {
        let mut reg = WeightRegistry::builtin();
        reg.profiles[3].category_weights.insert(CheckCategory::Resource, 1.5);
        let c = parse_classification("D/2A/3").unwrap();
        assert!(matches!(
            resolve_weight_profile(&c, &reg),
            Err(RegistryError::InvalidWeights { .. })
        ));
    }

    #[test]
    fn bad_process_sum_is_rejected() {
        let mut reg = WeightRegistry::builtin();
        reg.profiles[3].process_weights.insert(ProcessKind::Cm, 0.5);
        let c = parse_classification("D/2A/3").unwrap();
        assert!(matches!(
            resolve_weight_profile(&c, &reg),
            Err(RegistryError::InvalidWeights { .. })
        ));
    }

    #[test]
    fn builtin_covers_all_criticalities() {
        for crit in ["A", "B", "C", "D", "E"] {
            for cplx in ["1", "2", "3"] {
                let p = resolve(&format!("{crit}/1A/{cplx}"));
                let sum: f64 = p.category_weights.values().sum();
                assert!((sum - 1.0).abs() < WEIGHT_SUM_TOLERANCE, "key {}", p.source_key);
            }
        }
    }
}
