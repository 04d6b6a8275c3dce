//! Command-line front end for the certification engine.
//!
//! Exit codes: 0 success (including certified-with-moderate-confidence),
//! 2 not certified, 3 input or validation error, 4 internal error;
//! `monitor` exits 5 when any recertification trigger fired. Errors print a
//! single machine-readable JSON line on stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use aircert::canonical::to_canonical_json;
use aircert::ledger::{ArtifactChange, ArtifactManifest, Ledger};
use aircert::monitor::{load_windows, monitor_stream, MonitorBaseline, TriggerConfig};
use aircert::report::{
    build_assurance_profile, render_profile, resolve_clock, weight_profile_for, RenderFormat,
};
use aircert::{
    audit_ledger_dir, load_evidence_bundle, parse_classification, required_validation_level,
    run_check_suite, CheckConfig, VerdictKind, WeightRegistry,
};

/// Environment variable naming the default check-config file.
const CONFIG_ENV: &str = "AIRCERT_CONFIG";

#[derive(Parser)]
#[command(name = "aircert", version, about = "Certification engine for ML-enabled airborne components")]
struct Cli {
    /// RFC 3339 timestamp to stamp into outputs, for byte-reproducible runs
    /// (also settable via AIRCERT_FIXED_CLOCK).
    #[arg(long, global = true, value_name = "ISO8601")]
    fixed_clock: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Markdown,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a classification triple and print its validation level.
    Classify {
        /// Classification like D/2A/3.
        triple: String,
    },
    /// Run the automated check suite over an evidence bundle.
    Check {
        bundle: PathBuf,
        /// Check-config JSON (defaults embedded; AIRCERT_CONFIG overrides).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Weight-registry JSON (built-in registry by default).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the full assurance profile and verdict.
    Certify {
        bundle: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for report files; without it the report prints to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: OutputFormat,
    },
    /// Evaluate operational windows against recertification triggers.
    Monitor {
        /// Monitoring baseline (assurance profile plus reference distributions).
        baseline: PathBuf,
        /// Window files: single JSON object, array, or newline-delimited.
        #[arg(required = true)]
        windows: Vec<PathBuf>,
        /// Trigger-config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Configuration-management ledger operations.
    Cm {
        #[command(subcommand)]
        command: CmCommand,
    },
}

#[derive(Subcommand)]
enum CmCommand {
    /// Register a baseline manifest into a new ledger directory.
    Init {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        dir: PathBuf,
    },
    /// Record an artifact change.
    Change {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        artifact: String,
        /// New content hash (64 lowercase hex characters).
        #[arg(long)]
        hash: String,
        /// Descriptor entries as key=value (repeatable; replaces the descriptor).
        #[arg(long = "descriptor", value_name = "KEY=VALUE")]
        descriptors: Vec<String>,
        /// JSON file with the new label distribution (datasets).
        #[arg(long)]
        label_dist: Option<PathBuf>,
        #[arg(long, default_value = "")]
        rationale: String,
    },
    /// Verify the hash chain and summarize outstanding recertifications.
    Audit {
        #[arg(long)]
        dir: PathBuf,
    },
}

struct CliError {
    code: u8,
    kind: &'static str,
    detail: String,
}

impl CliError {
    fn input(kind: &'static str, detail: impl std::fmt::Display) -> Self {
        CliError { code: 3, kind, detail: detail.to_string() }
    }

    fn internal(detail: impl std::fmt::Display) -> Self {
        CliError { code: 4, kind: "InternalError", detail: detail.to_string() }
    }
}

impl From<aircert::IngestError> for CliError {
    fn from(e: aircert::IngestError) -> Self {
        use aircert::IngestError::*;
        let kind = match &e {
            Io(_) => "IoError",
            Parse { .. } => "ParseError",
            SchemaViolation { .. } => "SchemaViolation",
            ChecksumMismatch { .. } => "ChecksumMismatch",
        };
        CliError::input(kind, e)
    }
}

impl From<aircert::ReportError> for CliError {
    fn from(e: aircert::ReportError) -> Self {
        use aircert::ReportError::*;
        let kind = match &e {
            Classification(_) => "ClassificationError",
            Registry(_) => "RegistryError",
            Check(_) => "CheckError",
            Scoring(_) => "ScoringError",
            BadClock(_) => "BadClock",
        };
        CliError::input(kind, e)
    }
}

impl From<aircert::LedgerError> for CliError {
    fn from(e: aircert::LedgerError) -> Self {
        CliError::input("LedgerError", e)
    }
}

impl From<aircert::MonitorError> for CliError {
    fn from(e: aircert::MonitorError) -> Self {
        CliError::input("MonitorError", e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input("IoError", e)
    }
}

fn load_config(flag: Option<&Path>) -> Result<CheckConfig, CliError> {
    let env_path = std::env::var(CONFIG_ENV).ok().map(PathBuf::from);
    let path = flag.map(Path::to_path_buf).or(env_path);
    match path {
        Some(p) => CheckConfig::from_file(&p)
            .map_err(|e| CliError::input("ConfigError", format!("{}: {e}", p.display()))),
        None => Ok(CheckConfig::default()),
    }
}

fn load_registry(flag: Option<&Path>) -> Result<WeightRegistry, CliError> {
    match flag {
        Some(p) => WeightRegistry::from_file(p)
            .map_err(|e| CliError::input("RegistryError", format!("{}: {e}", p.display()))),
        None => Ok(WeightRegistry::builtin()),
    }
}

/// Prints a line to stdout, exiting quietly when the consumer closed the pipe.
fn emit(content: impl std::fmt::Display) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{content}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("{}", json!({"error": "InternalError", "detail": e.to_string()}));
        std::process::exit(4);
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(CliError::internal),
        None => {
            emit(content);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Classify { triple } => {
            let c = parse_classification(&triple)
                .map_err(|e| CliError::input("ClassificationError", e))?;
            let level = required_validation_level(&c);
            let line = json!({
                "classification": c.to_string(),
                "criticality": c.crit.as_str(),
                "autonomy": c.autonomy.as_str(),
                "model_complexity": c.model_complexity.as_number(),
                "validation_level": level.as_str(),
                "description": level.description(),
            });
            emit(&line);
            Ok(0)
        }
        Command::Check { bundle, config, weights, out } => {
            let bundle = load_evidence_bundle(&bundle)?;
            let cfg = load_config(config.as_deref())?;
            let registry = load_registry(weights.as_deref())?;
            let (classification, profile) = weight_profile_for(&bundle, &registry)?;
            let report = run_check_suite(&bundle, &classification, &profile, &cfg)
                .map_err(|e| CliError::input("CheckError", e))?;
            let rendered = to_canonical_json(&report).map_err(CliError::internal)?;
            write_or_print(out.as_deref(), &rendered)?;
            Ok(0)
        }
        Command::Certify { bundle, weights, config, out, format } => {
            let bundle = load_evidence_bundle(&bundle)?;
            let cfg = load_config(config.as_deref())?;
            let registry = load_registry(weights.as_deref())?;
            let now = resolve_clock(cli.fixed_clock.as_deref())?;
            let profile = build_assurance_profile(&bundle, &registry, &cfg, now)?;

            match (&out, format) {
                (None, OutputFormat::Both) => {
                    return Err(CliError::input(
                        "UsageError",
                        "--format both requires --out <dir>",
                    ));
                }
                (None, OutputFormat::Markdown) => {
                    emit(render_profile(&profile, RenderFormat::Markdown));
                }
                (None, OutputFormat::Json) => {
                    emit(render_profile(&profile, RenderFormat::Json));
                }
                (Some(dir), format) => {
                    std::fs::create_dir_all(dir).map_err(CliError::internal)?;
                    let mut files = Vec::new();
                    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
                        let path = dir.join("assurance_profile.json");
                        std::fs::write(&path, render_profile(&profile, RenderFormat::Json))
                            .map_err(CliError::internal)?;
                        files.push(path.display().to_string());
                    }
                    if matches!(format, OutputFormat::Markdown | OutputFormat::Both) {
                        let path = dir.join("assurance_profile.md");
                        std::fs::write(&path, render_profile(&profile, RenderFormat::Markdown))
                            .map_err(CliError::internal)?;
                        files.push(path.display().to_string());
                    }
                    let line = json!({
                        "final_score": profile.final_score.value,
                        "band": profile.final_score.band,
                        "verdict": profile.final_score.verdict.verdict,
                        "files": files,
                    });
                    emit(&line);
                }
            }
            Ok(if profile.final_score.verdict.verdict == VerdictKind::NotCertified { 2 } else { 0 })
        }
        Command::Monitor { baseline, windows, config } => {
            let baseline = MonitorBaseline::from_file(&baseline)
                .map_err(|e| CliError::input("ParseError", e))?;
            let cfg = match config {
                Some(p) => TriggerConfig::from_file(&p)
                    .map_err(|e| CliError::input("ConfigError", format!("{}: {e}", p.display())))?,
                None => TriggerConfig::default(),
            };
            let mut all = Vec::new();
            for path in &windows {
                all.extend(load_windows(path).map_err(|e| CliError::input("ParseError", e))?);
            }
            let reports = monitor_stream(&baseline, &all, &cfg)?;
            emit(to_canonical_json(&reports).map_err(CliError::internal)?);
            let fired = reports.iter().any(|r| r.recertification_required);
            Ok(if fired { 5 } else { 0 })
        }
        Command::Cm { command } => match command {
            CmCommand::Init { manifest, dir } => {
                let manifest: ArtifactManifest =
                    serde_json::from_str(&std::fs::read_to_string(&manifest)?)
                        .map_err(|e| CliError::input("ParseError", e))?;
                let ledger = Ledger::register_baseline(manifest)?;
                ledger.save(&dir)?;
                emit(json!({"head_hash": ledger.head_hash(), "records": 0}));
                Ok(0)
            }
            CmCommand::Change { dir, artifact, hash, descriptors, label_dist, rationale } => {
                let mut ledger = Ledger::load(&dir)?;
                let new_descriptor = if descriptors.is_empty() {
                    None
                } else {
                    let mut map = BTreeMap::new();
                    for pair in &descriptors {
                        let (k, v) = pair.split_once('=').ok_or_else(|| {
                            CliError::input(
                                "UsageError",
                                format!("descriptor {pair:?} is not key=value"),
                            )
                        })?;
                        map.insert(k.to_string(), v.to_string());
                    }
                    Some(map)
                };
                let new_label_distribution = match label_dist {
                    Some(p) => Some(
                        serde_json::from_str(&std::fs::read_to_string(&p)?)
                            .map_err(|e| CliError::input("ParseError", e))?,
                    ),
                    None => None,
                };
                let now = resolve_clock(cli.fixed_clock.as_deref())?;
                let record = ledger.record_change(
                    &ArtifactChange {
                        artifact_id: artifact,
                        new_hash: hash,
                        new_descriptor,
                        new_label_distribution,
                        rationale,
                    },
                    now,
                )?;
                ledger.save(&dir)?;
                emit(to_canonical_json(&record).map_err(CliError::internal)?);
                Ok(0)
            }
            CmCommand::Audit { dir } => {
                let report = audit_ledger_dir(&dir)?;
                emit(to_canonical_json(&report).map_err(CliError::internal)?);
                Ok(if report.chain_valid { 0 } else { 3 })
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", json!({"error": "UsageError", "detail": e.to_string()}));
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind, "detail": e.detail}));
            ExitCode::from(e.code)
        }
    }
}
