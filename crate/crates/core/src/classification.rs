//! System classification: the criticality / autonomy / model-complexity triple
//! that tailors certification rigor, plus the enumerations shared by the
//! scoring and check pipelines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// DO-178C software criticality level, A (catastrophic) through E (no effect).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criticality {
    A,
    B,
    C,
    D,
    E,
}

impl Criticality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criticality::A => "A",
            Criticality::B => "B",
            Criticality::C => "C",
            Criticality::D => "D",
            Criticality::E => "E",
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "A" => Some(Criticality::A),
            "B" => Some(Criticality::B),
            "C" => Some(Criticality::C),
            "D" => Some(Criticality::D),
            "E" => Some(Criticality::E),
            _ => None,
        }
    }
}

/// EASA-style autonomy level, 1A (full human supervision) through 3B (full autonomy).
///
/// The engine varies no check or scoring behavior by autonomy; the level is
/// carried for report metadata and weight-registry lookup keys only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AutonomyLevel {
    #[serde(rename = "1A")]
    OneA,
    #[serde(rename = "1B")]
    OneB,
    #[serde(rename = "2A")]
    TwoA,
    #[serde(rename = "2B")]
    TwoB,
    #[serde(rename = "3A")]
    ThreeA,
    #[serde(rename = "3B")]
    ThreeB,
}

impl AutonomyLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AutonomyLevel::OneA => "1A",
            AutonomyLevel::OneB => "1B",
            AutonomyLevel::TwoA => "2A",
            AutonomyLevel::TwoB => "2B",
            AutonomyLevel::ThreeA => "3A",
            AutonomyLevel::ThreeB => "3B",
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "1A" => Some(AutonomyLevel::OneA),
            "1B" => Some(AutonomyLevel::OneB),
            "2A" => Some(AutonomyLevel::TwoA),
            "2B" => Some(AutonomyLevel::TwoB),
            "3A" => Some(AutonomyLevel::ThreeA),
            "3B" => Some(AutonomyLevel::ThreeB),
            _ => None,
        }
    }
}

/// ML model complexity: 1 (simple, interpretable) to 3 (deep/nonlinear).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ModelComplexity {
    Level1,
    Level2,
    Level3,
}

impl ModelComplexity {
    pub fn as_number(&self) -> u8 {
        match self {
            ModelComplexity::Level1 => 1,
            ModelComplexity::Level2 => 2,
            ModelComplexity::Level3 => 3,
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.trim() {
            "1" => Some(ModelComplexity::Level1),
            "2" => Some(ModelComplexity::Level2),
            "3" => Some(ModelComplexity::Level3),
            _ => None,
        }
    }
}

impl TryFrom<u8> for ModelComplexity {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(ModelComplexity::Level1),
            2 => Ok(ModelComplexity::Level2),
            3 => Ok(ModelComplexity::Level3),
            other => Err(format!("model complexity must be 1, 2 or 3, got {other}")),
        }
    }
}

impl From<ModelComplexity> for u8 {
    fn from(value: ModelComplexity) -> Self {
        value.as_number()
    }
}

/// The classification triple driving weights, thresholds and validation depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Classification {
    pub crit: Criticality,
    pub autonomy: AutonomyLevel,
    pub model_complexity: ModelComplexity,
}

impl Classification {
    pub fn new(crit: Criticality, autonomy: AutonomyLevel, model_complexity: ModelComplexity) -> Self {
        Self { crit, autonomy, model_complexity }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            self.crit.as_str(),
            self.autonomy.as_str(),
            self.model_complexity.as_number()
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassificationError {
    #[error("classification must be three '/'-separated tokens, got {0:?}")]
    Format(String),
    #[error("unknown criticality level {0:?} (expected A-E)")]
    UnknownCriticality(String),
    #[error("unknown autonomy level {0:?} (expected 1A-3B)")]
    UnknownAutonomy(String),
    #[error("unknown model complexity {0:?} (expected 1-3)")]
    UnknownComplexity(String),
}

/// Parses a `crit/autonomy/complexity` token such as `D/2A/3`.
/// Letters are case-insensitive.
pub fn parse_classification(text: &str) -> Result<Classification, ClassificationError> {
    let tokens: Vec<&str> = text.split('/').collect();
    if tokens.len() != 3 {
        return Err(ClassificationError::Format(text.to_string()));
    }
    let crit = Criticality::parse(tokens[0])
        .ok_or_else(|| ClassificationError::UnknownCriticality(tokens[0].to_string()))?;
    let autonomy = AutonomyLevel::parse(tokens[1])
        .ok_or_else(|| ClassificationError::UnknownAutonomy(tokens[1].to_string()))?;
    let model_complexity = ModelComplexity::parse(tokens[2])
        .ok_or_else(|| ClassificationError::UnknownComplexity(tokens[2].to_string()))?;
    Ok(Classification { crit, autonomy, model_complexity })
}

/// Validation extensiveness required by the model complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValidationLevel {
    V1,
    V2,
    V3,
}

impl ValidationLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValidationLevel::V1 => "V1",
            ValidationLevel::V2 => "V2",
            ValidationLevel::V3 => "V3",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ValidationLevel::V1 => "minimal validation: core integrity, performance and resource checks",
            ValidationLevel::V2 => "moderate validation: adds train/test drift analysis",
            ValidationLevel::V3 => "extensive validation: full suite including perturbation robustness",
        }
    }

    /// True when perturbation-robustness checks run at this level.
    pub fn runs_robustness_checks(&self) -> bool {
        matches!(self, ValidationLevel::V3)
    }

    /// True when train/test drift checks run at this level.
    pub fn runs_drift_checks(&self) -> bool {
        matches!(self, ValidationLevel::V2 | ValidationLevel::V3)
    }
}

impl std::fmt::Display for ValidationLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps model complexity to the validation level: 1→V1, 2→V2, 3→V3.
///
/// V3 enables the full check suite; V2 drops perturbation-robustness checks;
/// V1 additionally drops the drift checks.
pub fn required_validation_level(c: &Classification) -> ValidationLevel {
    match c.model_complexity {
        ModelComplexity::Level1 => ValidationLevel::V1,
        ModelComplexity::Level2 => ValidationLevel::V2,
        ModelComplexity::Level3 => ValidationLevel::V3,
    }
}

/// The four certification processes, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Dev,
    #[serde(rename = "vandv")]
    VandV,
    Qa,
    Cm,
}

impl ProcessKind {
    pub const ALL: [ProcessKind; 4] =
        [ProcessKind::Dev, ProcessKind::VandV, ProcessKind::Qa, ProcessKind::Cm];

    /// Short name used in final-summary rows.
    pub fn short_name(&self) -> &'static str {
        match self {
            ProcessKind::Dev => "Development",
            ProcessKind::VandV => "V&V",
            ProcessKind::Qa => "QA",
            ProcessKind::Cm => "SCM",
        }
    }

    /// Numbered section header used in rendered reports.
    pub fn section_header(&self) -> &'static str {
        match self {
            ProcessKind::Dev => "1. Development",
            ProcessKind::VandV => "2. Verification & Validation (V&V)",
            ProcessKind::Qa => "3. Quality Assurance (QA)",
            ProcessKind::Cm => "4. Configuration Management (CM)",
        }
    }
}

/// The four automated evaluation categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckCategory {
    DataIntegrity,
    TrainTest,
    ModelPerformance,
    Resource,
}

impl CheckCategory {
    pub const ALL: [CheckCategory; 4] = [
        CheckCategory::DataIntegrity,
        CheckCategory::TrainTest,
        CheckCategory::ModelPerformance,
        CheckCategory::Resource,
    ];

    pub fn display_name(&self) -> &'static str {
        match self {
            CheckCategory::DataIntegrity => "Data Integrity",
            CheckCategory::TrainTest => "Train-Test Evaluation",
            CheckCategory::ModelPerformance => "Model Performance",
            CheckCategory::Resource => "Resource Utilization",
        }
    }
}
