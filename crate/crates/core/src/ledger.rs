//! Configuration-management ledger: a content-addressed baseline manifest and
//! an append-only, hash-chained list of change records.
//!
//! On disk a ledger is two files: `baseline.json` (canonical manifest JSON)
//! and `ledger.ndjson` (one canonical-JSON chained record per line). Each
//! line commits to its predecessor: `this_hash = sha256(prev_hash ||
//! canonical(record))`, with the chain anchored at the canonical hash of the
//! baseline manifest. Flipping any byte of any line breaks verification at or
//! before that line.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;
use crate::checks::stats::total_variation;

/// Kind of configuration item under management.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Model,
    Dataset,
    Interface,
    Config,
    Uncertainty,
}

/// One artifact in the configuration baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub artifact_id: String,
    pub kind: ArtifactKind,
    /// SHA-256 of the artifact content, 64 lowercase hex characters.
    pub content_hash: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub descriptor: BTreeMap<String, String>,
    /// Label distribution for dataset artifacts; drives drift significance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_distribution: Option<BTreeMap<String, f64>>,
}

/// The identified configuration baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    pub entries: Vec<ManifestEntry>,
}

impl ArtifactManifest {
    pub fn validate(&self) -> Result<(), LedgerError> {
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.entries {
            if !seen.insert(entry.artifact_id.as_str()) {
                return Err(LedgerError::DuplicateArtifactId(entry.artifact_id.clone()));
            }
            if !canonical::is_content_hash(&entry.content_hash) {
                return Err(LedgerError::InvalidManifest(format!(
                    "artifact {:?} content_hash is not 64 lowercase hex characters",
                    entry.artifact_id
                )));
            }
        }
        Ok(())
    }

    pub fn canonical_hash(&self) -> String {
        canonical::canonical_hash(self).expect("manifest serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    Major,
    Minor,
}

/// One recorded artifact change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub ledger_seq: u64,
    pub artifact_id: String,
    pub old_hash: String,
    pub new_hash: String,
    pub significance: Significance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_magnitude: Option<f64>,
    pub recertification_flag: bool,
    pub rationale: String,
    pub timestamp: DateTime<Utc>,
}

/// A change record chained to its predecessor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainedRecord {
    pub prev_hash: String,
    pub record: ChangeRecord,
    pub this_hash: String,
}

fn chain_hash(prev_hash: &str, record: &ChangeRecord) -> String {
    let record_json = canonical::to_canonical_json(record).expect("record serializes");
    let mut bytes = Vec::with_capacity(prev_hash.len() + record_json.len());
    bytes.extend_from_slice(prev_hash.as_bytes());
    bytes.extend_from_slice(record_json.as_bytes());
    canonical::sha256_hex(&bytes)
}

/// A change submitted against the ledger. `new_descriptor` and
/// `new_label_distribution` of `None` mean "unchanged".
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactChange {
    pub artifact_id: String,
    pub new_hash: String,
    pub new_descriptor: Option<BTreeMap<String, String>>,
    pub new_label_distribution: Option<BTreeMap<String, f64>>,
    pub rationale: String,
}

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("duplicate artifact id {0:?}")]
    DuplicateArtifactId(String),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("unknown artifact {0:?}")]
    UnknownArtifact(String),
    #[error("no change: hash and descriptor are identical for {0:?}")]
    NoChange(String),
    #[error("ledger parse error: {0}")]
    Parse(String),
    #[error("ledger chain broken at record {0}")]
    ChainBroken(u64),
    #[error("ledger io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Audit outcome over a ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub chain_valid: bool,
    pub record_count: u64,
    pub major_count: u64,
    /// Major changes not followed by any record whose rationale mentions
    /// "recertified" (a recertification clears all majors before it).
    pub outstanding_recertifications: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// In-memory ledger with derived current artifact state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    baseline: ArtifactManifest,
    records: Vec<ChainedRecord>,
    head_hash: String,
    current: BTreeMap<String, ManifestEntry>,
}

impl Ledger {
    /// Registers a baseline: an empty record list anchored at the manifest hash.
    pub fn register_baseline(manifest: ArtifactManifest) -> Result<Self, LedgerError> {
        manifest.validate()?;
        let head_hash = manifest.canonical_hash();
        let current =
            manifest.entries.iter().map(|e| (e.artifact_id.clone(), e.clone())).collect();
        Ok(Ledger { baseline: manifest, records: Vec::new(), head_hash, current })
    }

    pub fn baseline(&self) -> &ArtifactManifest {
        &self.baseline
    }

    pub fn records(&self) -> &[ChainedRecord] {
        &self.records
    }

    pub fn head_hash(&self) -> &str {
        &self.head_hash
    }

    pub fn current_entry(&self, artifact_id: &str) -> Option<&ManifestEntry> {
        self.current.get(artifact_id)
    }

    /// Classifies and appends a change, extending the hash chain.
    ///
    /// Major changes: a model whose content hash changed, a dataset whose
    /// label distribution moved by more than 0.30 total variation, or any
    /// change to an uncertainty artifact. Major sets the recertification flag.
    pub fn record_change(
        &mut self,
        change: &ArtifactChange,
        timestamp: DateTime<Utc>,
    ) -> Result<ChangeRecord, LedgerError> {
        let entry = self
            .current
            .get(&change.artifact_id)
            .ok_or_else(|| LedgerError::UnknownArtifact(change.artifact_id.clone()))?
            .clone();

        if !canonical::is_content_hash(&change.new_hash) {
            return Err(LedgerError::InvalidManifest(format!(
                "new hash for {:?} is not 64 lowercase hex characters",
                change.artifact_id
            )));
        }

        let new_descriptor = change.new_descriptor.clone().unwrap_or_else(|| entry.descriptor.clone());
        let hash_changed = change.new_hash != entry.content_hash;
        let descriptor_changed = new_descriptor != entry.descriptor;
        if !hash_changed && !descriptor_changed {
            return Err(LedgerError::NoChange(change.artifact_id.clone()));
        }

        let mut drift_magnitude = None;
        let significance = match entry.kind {
            ArtifactKind::Model if hash_changed => Significance::Major,
            ArtifactKind::Dataset => {
                if let (Some(old_dist), Some(new_dist)) =
                    (&entry.label_distribution, &change.new_label_distribution)
                {
                    let tv = total_variation(old_dist, new_dist);
                    drift_magnitude = Some(tv);
                    if tv > 0.30 {
                        Significance::Major
                    } else {
                        Significance::Minor
                    }
                } else {
                    Significance::Minor
                }
            }
            ArtifactKind::Uncertainty => Significance::Major,
            _ => Significance::Minor,
        };

        let record = ChangeRecord {
            ledger_seq: self.records.len() as u64 + 1,
            artifact_id: change.artifact_id.clone(),
            old_hash: entry.content_hash.clone(),
            new_hash: change.new_hash.clone(),
            significance,
            drift_magnitude,
            recertification_flag: significance == Significance::Major,
            rationale: change.rationale.clone(),
            timestamp,
        };
        let this_hash = chain_hash(&self.head_hash, &record);
        self.records.push(ChainedRecord {
            prev_hash: self.head_hash.clone(),
            record: record.clone(),
            this_hash: this_hash.clone(),
        });
        self.head_hash = this_hash;

        let current = self.current.get_mut(&change.artifact_id).expect("entry exists");
        current.content_hash = change.new_hash.clone();
        current.descriptor = new_descriptor;
        if change.new_label_distribution.is_some() {
            current.label_distribution = change.new_label_distribution.clone();
        }
        Ok(record)
    }

    /// Verifies the hash chain and summarizes record significance.
    pub fn audit(&self) -> AuditReport {
        audit_records(
            &self.baseline,
            self.records.iter().map(|chained| AuditItem::Parsed { chained, raw: None }),
        )
    }

    /// Writes `baseline.json` and `ledger.ndjson` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), LedgerError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("baseline.json"),
            canonical::to_canonical_json(&self.baseline).expect("manifest serializes"),
        )?;
        let mut lines = String::new();
        for record in &self.records {
            lines.push_str(&canonical::to_canonical_json(record).expect("record serializes"));
            lines.push('\n');
        }
        std::fs::write(dir.join("ledger.ndjson"), lines)?;
        Ok(())
    }

    /// Loads and strictly verifies a ledger directory. Use
    /// [`audit_ledger_dir`] to inspect a possibly corrupted ledger.
    pub fn load(dir: &Path) -> Result<Self, LedgerError> {
        let baseline: ArtifactManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join("baseline.json"))?)
                .map_err(|e| LedgerError::Parse(format!("baseline.json: {e}")))?;
        let mut ledger = Ledger::register_baseline(baseline)?;

        let ledger_path = dir.join("ledger.ndjson");
        let text = if ledger_path.exists() {
            std::fs::read_to_string(&ledger_path)?
        } else {
            String::new()
        };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let chained: ChainedRecord = serde_json::from_str(line)
                .map_err(|e| LedgerError::Parse(format!("ledger.ndjson line {}: {e}", i + 1)))?;
            // The stored line must be byte-identical to the canonical form of
            // what it parses to: otherwise a flipped digit below float
            // round-trip precision would re-serialize (and re-hash) cleanly.
            if canonical::to_canonical_json(&chained).ok().as_deref() != Some(line)
                || chained.prev_hash != ledger.head_hash
                || chain_hash(&chained.prev_hash, &chained.record) != chained.this_hash
            {
                return Err(LedgerError::ChainBroken(i as u64));
            }
            ledger.head_hash = chained.this_hash.clone();
            ledger.apply_loaded(&chained.record);
            ledger.records.push(chained);
        }
        Ok(ledger)
    }

    fn apply_loaded(&mut self, record: &ChangeRecord) {
        if let Some(entry) = self.current.get_mut(&record.artifact_id) {
            entry.content_hash = record.new_hash.clone();
        }
    }
}

/// One ledger line under audit: a parsed record (with its raw line when it
/// came from disk) or a parse failure.
enum AuditItem<'a> {
    Parsed { chained: &'a ChainedRecord, raw: Option<&'a str> },
    Corrupt(String),
}

fn audit_records<'a, I>(baseline: &ArtifactManifest, records: I) -> AuditReport
where
    I: Iterator<Item = AuditItem<'a>>,
{
    let mut expected_prev = baseline.canonical_hash();
    let mut chain_valid = true;
    let mut corruption_index = None;
    let mut notes = Vec::new();
    let mut record_count = 0u64;
    let mut majors: Vec<bool> = Vec::new();
    let mut recert_indices: Vec<usize> = Vec::new();

    for (i, item) in records.enumerate() {
        record_count += 1;
        match item {
            AuditItem::Parsed { chained, raw } => {
                let canonical_line = canonical::to_canonical_json(chained).ok();
                if chain_valid {
                    if raw.is_some() && canonical_line.as_deref() != raw {
                        chain_valid = false;
                        corruption_index = Some(i as u64);
                        notes.push(format!("record {i}: stored bytes are not canonical"));
                    } else if chained.prev_hash != expected_prev {
                        chain_valid = false;
                        corruption_index = Some(i as u64);
                        notes.push(format!("record {i}: previous-hash link mismatch"));
                    } else if chain_hash(&chained.prev_hash, &chained.record) != chained.this_hash {
                        chain_valid = false;
                        corruption_index = Some(i as u64);
                        notes.push(format!("record {i}: stored hash does not match content"));
                    } else {
                        expected_prev = chained.this_hash.clone();
                    }
                }
                majors.push(chained.record.significance == Significance::Major);
                if chained.record.rationale.to_lowercase().contains("recertified") {
                    recert_indices.push(i);
                }
            }
            AuditItem::Corrupt(detail) => {
                if chain_valid {
                    chain_valid = false;
                    corruption_index = Some(i as u64);
                }
                notes.push(format!("record {i}: {detail}"));
                majors.push(false);
            }
        }
    }

    let last_recert = recert_indices.last().copied();
    let outstanding = majors
        .iter()
        .enumerate()
        .filter(|(i, is_major)| **is_major && last_recert.is_none_or(|r| *i >= r))
        .count() as u64;

    AuditReport {
        chain_valid,
        record_count,
        major_count: majors.iter().filter(|m| **m).count() as u64,
        outstanding_recertifications: outstanding,
        corruption_index,
        notes,
    }
}

/// Audits a ledger directory without requiring it to parse cleanly:
/// unparseable lines are reported as corruption, never thrown.
pub fn audit_ledger_dir(dir: &Path) -> Result<AuditReport, LedgerError> {
    let baseline: ArtifactManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("baseline.json"))?)
            .map_err(|e| LedgerError::Parse(format!("baseline.json: {e}")))?;
    let ledger_path = dir.join("ledger.ndjson");
    // Read lossily: a corrupted ledger may not even be valid UTF-8, and
    // corruption is reported, never thrown.
    let bytes = if ledger_path.exists() { std::fs::read(&ledger_path)? } else { Vec::new() };
    let text = String::from_utf8_lossy(&bytes);

    let parsed: Vec<(String, Result<ChainedRecord, String>)> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            (
                line.to_string(),
                serde_json::from_str::<ChainedRecord>(line).map_err(|e| e.to_string()),
            )
        })
        .collect();
    Ok(audit_records(
        &baseline,
        parsed.iter().map(|(line, result)| match result {
            Ok(chained) => AuditItem::Parsed { chained, raw: Some(line.as_str()) },
            Err(detail) => AuditItem::Corrupt(detail.clone()),
        }),
    ))
}
