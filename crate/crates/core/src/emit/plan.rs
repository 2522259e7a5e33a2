//! The implementation plan: a JSON document carrying everything the
//! apply/check machinery needs, one entry per automatable rule.

use super::EmitError;
use crate::guide::{Guide, VerificationStatus};
use crate::lower::{
    AuditAutomation, ConfigScope, LowLevelAutomation, RegistryAction, RegistryAutomation,
    SeceditAutomation, SeceditSection,
};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

/// Epoch timestamp used when the caller supplies no clock, keeping exports
/// byte-identical across runs.
pub const DEFAULT_GENERATED_AT: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplementationPlan {
    pub schema_version: u32,
    pub guide_title: String,
    pub generated_at: String,
    pub rules: Vec<PlanRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRule {
    pub rule_id: String,
    pub ui_path: String,
    /// Display form of the verified value.
    pub value: String,
    pub low_level: Vec<PlanAutomation>,
}

/// Wire form of a low-level automation inside the plan document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system")]
pub enum PlanAutomation {
    #[serde(rename = "org.scapolite.implementation.windows_registry")]
    Registry {
        config: String,
        registry_key: String,
        value_name: String,
        action: String,
    },
    #[serde(rename = "org.scapolite.implementation.windows_secedit")]
    Secedit {
        section: String,
        key: String,
        value: String,
    },
    #[serde(rename = "org.scapolite.implementation.windows_audit")]
    Audit {
        subcategory: String,
        guid: String,
        setting_value: u8,
    },
}

impl From<&LowLevelAutomation> for PlanAutomation {
    fn from(automation: &LowLevelAutomation) -> Self {
        match automation {
            LowLevelAutomation::Registry(reg) => PlanAutomation::Registry {
                config: reg.scope.to_string(),
                registry_key: reg.registry_key.clone(),
                value_name: reg.value_name.clone(),
                action: reg.action.encode(),
            },
            LowLevelAutomation::Secedit(sec) => PlanAutomation::Secedit {
                section: sec.section.heading().to_string(),
                key: sec.key.clone(),
                value: sec.value.clone(),
            },
            LowLevelAutomation::Audit(audit) => PlanAutomation::Audit {
                subcategory: audit.subcategory.clone(),
                guid: audit.guid.clone(),
                setting_value: audit.setting_value,
            },
        }
    }
}

impl PlanAutomation {
    pub fn to_low_level(&self) -> Result<LowLevelAutomation, EmitError> {
        Ok(match self {
            PlanAutomation::Registry {
                config,
                registry_key,
                value_name,
                action,
            } => {
                let scope = match config.as_str() {
                    "Computer" => ConfigScope::Computer,
                    "User" => ConfigScope::User,
                    other => {
                        return Err(EmitError::Schema(format!("unknown config scope `{other}`")))
                    }
                };
                LowLevelAutomation::Registry(RegistryAutomation {
                    scope,
                    registry_key: registry_key.clone(),
                    value_name: value_name.clone(),
                    action: RegistryAction::decode(action)
                        .map_err(|e| EmitError::Schema(e.to_string()))?,
                })
            }
            PlanAutomation::Secedit {
                section,
                key,
                value,
            } => {
                let section = SeceditSection::from_heading(section).ok_or_else(|| {
                    EmitError::Schema(format!("unknown template section `{section}`"))
                })?;
                LowLevelAutomation::Secedit(SeceditAutomation {
                    section,
                    key: key.clone(),
                    value: value.clone(),
                })
            }
            PlanAutomation::Audit {
                subcategory,
                guid,
                setting_value,
            } => {
                if *setting_value > 3 {
                    return Err(EmitError::Schema(format!(
                        "audit setting value {setting_value} is out of range"
                    )));
                }
                LowLevelAutomation::Audit(AuditAutomation {
                    subcategory: subcategory.clone(),
                    guid: guid.clone(),
                    setting_value: *setting_value,
                })
            }
        })
    }
}

/// Collect the automatable rules of a lowered guide into a plan. Rules
/// without low-level automations are not part of the plan.
pub fn build_plan(guide: &Guide, generated_at: &str) -> ImplementationPlan {
    let mut rules = Vec::new();
    for rule in &guide.rules {
        let low_level: Vec<PlanAutomation> =
            rule.low_level_automations().map(PlanAutomation::from).collect();
        if low_level.is_empty() {
            continue;
        }
        let checked = rule
            .win_gpo_automations()
            .find(|a| a.verification_status == VerificationStatus::Checked);
        rules.push(PlanRule {
            rule_id: rule.id.clone(),
            ui_path: checked
                .map(|a| a.ui_path.display())
                .unwrap_or_default(),
            value: checked.map(|a| a.value.summary()).unwrap_or_default(),
            low_level,
        });
    }
    ImplementationPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        guide_title: guide.title.clone(),
        generated_at: generated_at.to_string(),
        rules,
    }
}

/// Serialize a plan with a stable field order.
pub fn export_plan(guide: &Guide, generated_at: &str) -> Vec<u8> {
    let plan = build_plan(guide, generated_at);
    let mut bytes = serde_json::to_vec_pretty(&plan).expect("plan serializes");
    bytes.push(b'\n');
    bytes
}

/// Parse and validate a plan document.
pub fn load_plan(bytes: &[u8]) -> Result<ImplementationPlan, EmitError> {
    let plan: ImplementationPlan =
        serde_json::from_slice(bytes).map_err(|e| EmitError::Schema(e.to_string()))?;
    if plan.schema_version != PLAN_SCHEMA_VERSION {
        return Err(EmitError::Schema(format!(
            "unsupported plan schema version {}",
            plan.schema_version
        )));
    }
    let mut seen = HashSet::new();
    for rule in &plan.rules {
        if !seen.insert(&rule.rule_id) {
            return Err(EmitError::Schema(format!(
                "duplicate rule id `{}` in plan",
                rule.rule_id
            )));
        }
        if rule.low_level.is_empty() {
            return Err(EmitError::Schema(format!(
                "plan rule `{}` has no automations",
                rule.rule_id
            )));
        }
    }
    Ok(plan)
}
