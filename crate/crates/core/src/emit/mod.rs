//! Artifact emitters: everything a lowered guide turns into on disk.
//!
//! All emitters are pure functions of the guide value, so re-running the
//! pipeline yields byte-identical artifacts.

pub mod audit;
pub mod inf;
pub mod plan;
pub mod pol;
pub mod report;

pub use audit::{emit_audit_csv, AUDIT_CSV_HEADER};
pub use inf::{decode_inf, emit_inf};
pub use plan::{
    build_plan, export_plan, load_plan, ImplementationPlan, PlanAutomation, PlanRule,
    DEFAULT_GENERATED_AT, PLAN_SCHEMA_VERSION,
};
pub use pol::{emit_pol, parse_pol, POL_MAGIC, POL_VERSION};
pub use report::{export_report, ReviewReport, REPORT_CSV_HEADER};

use crate::guide::Guide;
use crate::lower::{AuditAutomation, ConfigScope, LowLevelAutomation, RegistryAutomation, SeceditAutomation};

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("registry policy entries mix {first} and {second} scope")]
    Scope {
        first: ConfigScope,
        second: ConfigScope,
    },
    #[error("registry policy format error at byte {offset}: {message}")]
    Format { message: String, offset: usize },
    #[error("plan schema error: {0}")]
    Schema(String),
}

/// The guide's low-level automations bucketed per emitter, registry entries
/// split by scope.
#[derive(Debug, Default)]
pub struct AutomationBuckets {
    pub registry_computer: Vec<RegistryAutomation>,
    pub registry_user: Vec<RegistryAutomation>,
    pub secedit: Vec<SeceditAutomation>,
    pub audit: Vec<AuditAutomation>,
}

pub fn collect_automations(guide: &Guide) -> AutomationBuckets {
    let mut buckets = AutomationBuckets::default();
    for rule in &guide.rules {
        for automation in rule.low_level_automations() {
            match automation {
                LowLevelAutomation::Registry(reg) => match reg.scope {
                    ConfigScope::Computer => buckets.registry_computer.push(reg.clone()),
                    ConfigScope::User => buckets.registry_user.push(reg.clone()),
                },
                LowLevelAutomation::Secedit(sec) => buckets.secedit.push(sec.clone()),
                LowLevelAutomation::Audit(audit) => buckets.audit.push(audit.clone()),
            }
        }
    }
    buckets
}
