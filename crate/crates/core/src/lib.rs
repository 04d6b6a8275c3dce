//! Certification engine for low-criticality ML-enabled airborne components.
//!
//! The engine evaluates an evidence bundle (dataset summaries, prediction
//! dumps, manual reviews, resource samples, artifact manifest) against a
//! semi-automated certification process:
//!
//! - [`classification`] parses the criticality/autonomy/complexity triple
//!   that tailors rigor, and maps complexity to a validation level.
//! - [`weights`] resolves classification-keyed process, activity and check
//!   category weights from a declarative registry.
//! - [`evidence`] loads and schema-validates the bundle.
//! - [`metrics`] scores detection predictions (IoU, matching, AP, mAP).
//! - [`checks`] runs the automated suite: data integrity, train/test drift,
//!   model performance and robustness, resource utilization.
//! - [`scoring`] blends manual and automated scores into weighted process
//!   scores, the final certification score, its confidence band and the
//!   criticality-based verdict.
//! - [`report`] assembles and renders the assurance profile.
//! - [`monitor`] evaluates operational windows against recertification
//!   triggers.
//! - [`ledger`] keeps the hash-chained configuration-management ledger.

pub mod canonical;
pub mod checks;
pub mod classification;
pub mod config;
pub mod evidence;
pub mod fixtures;
pub mod ledger;
pub mod metrics;
pub mod monitor;
pub mod report;
pub mod scoring;
pub mod weights;

pub use checks::{run_check_suite, CheckError, CheckResult, CheckSuiteReport};
pub use classification::{
    parse_classification, required_validation_level, CheckCategory, Classification,
    ClassificationError, Criticality, ProcessKind, ValidationLevel,
};
pub use config::CheckConfig;
pub use evidence::{
    load_evidence_bundle, parse_evidence_bundle, validate_evidence_coverage, EvidenceBundle,
    IngestError,
};
pub use ledger::{audit_ledger_dir, ArtifactManifest, AuditReport, Ledger, LedgerError};
pub use metrics::{evaluate_performance, PerformanceMetrics};
pub use monitor::{
    evaluate_triggers, monitor_stream, MonitorBaseline, MonitorError, OperationalWindow,
    TriggerConfig, TriggerReport,
};
pub use report::{
    build_assurance_profile, render_profile, AssuranceProfile, RenderFormat, ReportError,
};
pub use scoring::{
    certification_verdict, confidence_level, ConfidenceBand, FinalScore, ScoringError, Verdict,
    VerdictKind,
};
pub use weights::{resolve_weight_profile, RegistryError, WeightProfile, WeightRegistry};
