//! In-memory model of a security-configuration guide and its rules.
//!
//! Guides are plain values: parsing produces one, every pipeline stage maps
//! it to a new one, serialization writes it back out. Nothing in here touches
//! the filesystem.

mod scapolite;
mod value;
mod xccdf;

pub use scapolite::{parse_scapolite, serialize_scapolite};
pub use value::{policy_value_from_yaml, policy_value_to_yaml};
pub use xccdf::import_xccdf;

pub use crate::catalog::normalize_display;
use crate::lower::LowLevelAutomation;
use crate::paths::PolicyPath;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const SYSTEM_WIN_GPO: &str = "org.scapolite.implementation.win_gpo";

#[derive(Debug, thiserror::Error)]
pub enum GuideError {
    #[error("parse error at {location}: {message}")]
    Parse { message: String, location: String },
    #[error("schema error: {0}")]
    Schema(String),
}

/// Audit-policy setting for one subcategory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditValue {
    NoAuditing,
    Success,
    Failure,
    SuccessAndFailure,
}

impl AuditValue {
    pub fn display(self) -> &'static str {
        match self {
            AuditValue::NoAuditing => "No Auditing",
            AuditValue::Success => "Success",
            AuditValue::Failure => "Failure",
            AuditValue::SuccessAndFailure => "Success and Failure",
        }
    }

    pub fn from_display(text: &str) -> Option<Self> {
        match normalize_display(text).as_str() {
            "no auditing" | "none" => Some(AuditValue::NoAuditing),
            "success" => Some(AuditValue::Success),
            "failure" => Some(AuditValue::Failure),
            "success and failure" | "failure and success" => Some(AuditValue::SuccessAndFailure),
            _ => None,
        }
    }

    /// audit.csv setting value: 0 none, 1 success, 2 failure, 3 both.
    pub fn code(self) -> u8 {
        match self {
            AuditValue::NoAuditing => 0,
            AuditValue::Success => 1,
            AuditValue::Failure => 2,
            AuditValue::SuccessAndFailure => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => AuditValue::NoAuditing,
            1 => AuditValue::Success,
            2 => AuditValue::Failure,
            3 => AuditValue::SuccessAndFailure,
            _ => return None,
        })
    }
}

/// The value a rule asks to set a policy to.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyValue {
    /// Enabled / Disabled.
    Toggle(bool),
    /// A numeric setting; for "N or fewer" phrasings this is the boundary.
    Number(i64),
    /// One admissible display string of an enumerated setting.
    Choice(String),
    /// Free text.
    Text(String),
    /// Accounts or groups; empty means "no one".
    Principals(Vec<String>),
    Audit(AuditValue),
    /// A main setting plus labelled sub-settings.
    Composite {
        main: Box<PolicyValue>,
        sub: Vec<(String, PolicyValue)>,
    },
}

impl PolicyValue {
    pub fn kind_name(&self) -> &'static str {
        match self {
            PolicyValue::Toggle(_) => "toggle",
            PolicyValue::Number(_) => "number",
            PolicyValue::Choice(_) => "choice",
            PolicyValue::Text(_) => "text",
            PolicyValue::Principals(_) => "principals",
            PolicyValue::Audit(_) => "audit",
            PolicyValue::Composite { .. } => "composite",
        }
    }

    /// Single-line display form for reports.
    pub fn summary(&self) -> String {
        match self {
            PolicyValue::Toggle(true) => "Enabled".to_string(),
            PolicyValue::Toggle(false) => "Disabled".to_string(),
            PolicyValue::Number(n) => n.to_string(),
            PolicyValue::Choice(s) | PolicyValue::Text(s) => s.clone(),
            PolicyValue::Principals(names) => names.join(", "),
            PolicyValue::Audit(v) => v.display().to_string(),
            PolicyValue::Composite { main, sub } => {
                let mut parts = vec![format!("main_setting={}", main.summary())];
                parts.extend(sub.iter().map(|(k, v)| format!("{k}={}", v.summary())));
                parts.join("; ")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerificationStatus {
    Checked,
    Unchecked,
}

/// Ranked suggestions attached to a failed verification: either a flat list
/// or one list per sub-setting.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidates {
    List(Vec<String>),
    PerElement(Vec<(String, Vec<String>)>),
}

/// A machine-readable policy automation attached to a rule.
#[derive(Debug, Clone, PartialEq)]
pub struct WinGpoAutomation {
    pub ui_path: PolicyPath,
    pub value: PolicyValue,
    pub verification_status: VerificationStatus,
    pub error_class: Option<String>,
    pub error_hint: Option<String>,
    pub candidates: Option<Candidates>,
}

impl WinGpoAutomation {
    pub fn new(ui_path: PolicyPath, value: PolicyValue) -> Self {
        WinGpoAutomation {
            ui_path,
            value,
            verification_status: VerificationStatus::Unchecked,
            error_class: None,
            error_hint: None,
            candidates: None,
        }
    }

    /// A checked automation never carries error fields.
    pub fn is_consistent(&self) -> bool {
        self.verification_status == VerificationStatus::Unchecked
            || (self.error_class.is_none()
                && self.error_hint.is_none()
                && self.candidates.is_none())
    }
}

/// Any automation entry in a guide file.
#[derive(Debug, Clone, PartialEq)]
pub enum Automation {
    WinGpo(WinGpoAutomation),
    LowLevel(LowLevelAutomation),
    /// Automation for a system this toolchain does not interpret; preserved
    /// verbatim for round-trips.
    Opaque {
        system: String,
        body: serde_yaml::Mapping,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Implementation {
    pub description: String,
    pub automations: Vec<Automation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStatus {
    #[default]
    NotAttempted,
    Extracted,
    NotExtracted,
    Ambiguous,
    ManuallyAuthored,
}

impl ExtractionStatus {
    pub fn wire_name(self) -> &'static str {
        match self {
            ExtractionStatus::NotAttempted => "not_attempted",
            ExtractionStatus::Extracted => "extracted",
            ExtractionStatus::NotExtracted => "not_extracted",
            ExtractionStatus::Ambiguous => "ambiguous",
            ExtractionStatus::ManuallyAuthored => "manually_authored",
        }
    }

    pub fn from_wire(name: &str) -> Option<Self> {
        Some(match name {
            "not_attempted" => ExtractionStatus::NotAttempted,
            "extracted" => ExtractionStatus::Extracted,
            "not_extracted" => ExtractionStatus::NotExtracted,
            "ambiguous" => ExtractionStatus::Ambiguous,
            "manually_authored" => ExtractionStatus::ManuallyAuthored,
            _ => return None,
        })
    }
}

/// One guide rule: prose plus any attached automations.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: String,
    pub rule_text: String,
    pub description: Option<String>,
    pub implementations: Vec<Implementation>,
    pub extraction_status: ExtractionStatus,
    /// Extraction hints (e.g. ambiguity candidates) for manual follow-up.
    pub extraction_note: Option<String>,
    /// Opaque automated-check payload carried over from XCCDF.
    pub check: Option<String>,
    /// Markdown sections under pointers this model does not know, kept
    /// verbatim so they survive a round-trip.
    pub extra_sections: Vec<(String, String)>,
}

impl Rule {
    pub fn new(id: impl Into<String>, rule_text: impl Into<String>) -> Self {
        Rule {
            id: id.into(),
            rule_text: rule_text.into(),
            description: None,
            implementations: Vec::new(),
            extraction_status: ExtractionStatus::NotAttempted,
            extraction_note: None,
            check: None,
            extra_sections: Vec::new(),
        }
    }

    /// The policy automations of this rule, over all implementations.
    pub fn win_gpo_automations(&self) -> impl Iterator<Item = &WinGpoAutomation> {
        self.implementations.iter().flat_map(|i| {
            i.automations.iter().filter_map(|a| match a {
                Automation::WinGpo(gpo) => Some(gpo),
                _ => None,
            })
        })
    }

    pub fn low_level_automations(&self) -> impl Iterator<Item = &LowLevelAutomation> {
        self.implementations.iter().flat_map(|i| {
            i.automations.iter().filter_map(|a| match a {
                Automation::LowLevel(low) => Some(low),
                _ => None,
            })
        })
    }

    pub fn has_automation(&self) -> bool {
        self.win_gpo_automations().next().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuideSource {
    Scapolite,
    Xccdf,
}

impl fmt::Display for GuideSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GuideSource::Scapolite => "scapolite",
            GuideSource::Xccdf => "xccdf",
        })
    }
}

/// A whole guide: title plus rules in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct Guide {
    pub title: String,
    pub source: GuideSource,
    pub rules: Vec<Rule>,
}

impl Guide {
    pub fn new(title: impl Into<String>, source: GuideSource) -> Self {
        Guide {
            title: title.into(),
            source,
            rules: Vec::new(),
        }
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Duplicate-id check; the parser enforces this, pipeline stages assert it.
    pub fn validate_rule_ids(&self) -> Result<(), GuideError> {
        let mut seen = std::collections::HashSet::new();
        for (index, rule) in self.rules.iter().enumerate() {
            if rule.rule_text.is_empty() {
                return Err(GuideError::Schema(format!(
                    "rule `{}` has empty rule text",
                    rule.id
                )));
            }
            if !seen.insert(rule.id.clone()) {
                let first = self.rules.iter().position(|r| r.id == rule.id).unwrap();
                return Err(GuideError::Schema(format!(
                    "duplicate rule id `{}` (rules {} and {})",
                    rule.id, first, index
                )));
            }
        }
        Ok(())
    }
}
