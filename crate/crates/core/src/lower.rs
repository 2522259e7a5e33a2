//! Low-level automations and the lowering pass that produces them.
//!
//! A verified policy automation names a UI path and a value; the machine
//! implements it through one of three primitives: a registry write, a
//! security-template (GptTmpl.inf) entry, or an audit-policy entry. Lowering
//! resolves the catalog mapping for each checked automation and never invents
//! registry locations: every key/value pair it emits comes verbatim from the
//! catalog entry for that path.

use crate::catalog::{
    AccessModel, Definition, ElementKind, PrivilegeDef, SettingCatalog,
    SettingDefinition, SettingElement,
};
use crate::guide::{normalize_display, Automation, AuditValue, Guide, PolicyValue, Rule,
    VerificationStatus, WinGpoAutomation};
use crate::paths::ClassRoot;
use crate::registry::RegistryData;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const SYSTEM_WINDOWS_REGISTRY: &str = "org.scapolite.implementation.windows_registry";
pub const SYSTEM_WINDOWS_SECEDIT: &str = "org.scapolite.implementation.windows_secedit";
pub const SYSTEM_WINDOWS_AUDIT: &str = "org.scapolite.implementation.windows_audit";

/// Which policy scope a registry automation configures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfigScope {
    Computer,
    User,
}

impl fmt::Display for ConfigScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfigScope::Computer => "Computer",
            ConfigScope::User => "User",
        })
    }
}

/// What to do with a registry value: write typed data, or remove it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryAction {
    Set(RegistryData),
    Delete,
}

impl RegistryAction {
    /// Text form used in guide files, e.g. `DWORD:0` or `DELETE`.
    pub fn encode(&self) -> String {
        match self {
            RegistryAction::Set(data) => data.encode(),
            RegistryAction::Delete => "DELETE".to_string(),
        }
    }

    pub fn decode(text: &str) -> Result<Self, crate::registry::DataDecodeError> {
        if text == "DELETE" {
            return Ok(RegistryAction::Delete);
        }
        RegistryData::decode(text).map(RegistryAction::Set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryAutomation {
    pub scope: ConfigScope,
    pub registry_key: String,
    pub value_name: String,
    pub action: RegistryAction,
}

/// GptTmpl.inf sections this toolchain writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeceditSection {
    SystemAccess,
    PrivilegeRights,
    RegistryValues,
}

impl SeceditSection {
    pub fn heading(self) -> &'static str {
        match self {
            SeceditSection::SystemAccess => "System Access",
            SeceditSection::PrivilegeRights => "Privilege Rights",
            SeceditSection::RegistryValues => "Registry Values",
        }
    }

    pub fn from_heading(text: &str) -> Option<Self> {
        match text {
            "System Access" => Some(SeceditSection::SystemAccess),
            "Privilege Rights" => Some(SeceditSection::PrivilegeRights),
            "Registry Values" => Some(SeceditSection::RegistryValues),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeceditAutomation {
    pub section: SeceditSection,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditAutomation {
    pub subcategory: String,
    pub guid: String,
    /// 0 none, 1 success, 2 failure, 3 success and failure.
    pub setting_value: u8,
}

/// A registry, security-template, or audit primitive derived from a verified
/// policy automation.
#[derive(Debug, Clone, PartialEq)]
pub enum LowLevelAutomation {
    Registry(RegistryAutomation),
    Secedit(SeceditAutomation),
    Audit(AuditAutomation),
}

impl LowLevelAutomation {
    pub fn system(&self) -> &'static str {
        match self {
            LowLevelAutomation::Registry(_) => SYSTEM_WINDOWS_REGISTRY,
            LowLevelAutomation::Secedit(_) => SYSTEM_WINDOWS_SECEDIT,
            LowLevelAutomation::Audit(_) => SYSTEM_WINDOWS_AUDIT,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LowerError {
    #[error("automation for `{0}` has not been verified")]
    Precondition(String),
    #[error("catalog entry for `{0}` vanished since verification")]
    Consistency(String),
    #[error("automation for `{path}` cannot be lowered: {reason}")]
    Unmappable { path: String, reason: String },
}

/// Translate one checked policy automation into its low-level automations.
pub fn lower_automation(
    catalog: &SettingCatalog,
    automation: &WinGpoAutomation,
) -> Result<Vec<LowLevelAutomation>, LowerError> {
    if automation.verification_status != VerificationStatus::Checked {
        return Err(LowerError::Precondition(automation.ui_path.display()));
    }
    let def = catalog
        .lookup(&automation.ui_path)
        .ok_or_else(|| LowerError::Consistency(automation.ui_path.display()))?;
    let scope = match automation.ui_path.class_root {
        ClassRoot::ComputerConfiguration => ConfigScope::Computer,
        ClassRoot::UserConfiguration => ConfigScope::User,
    };

    let out = match def {
        Definition::Admx(setting) => lower_admx(setting, &automation.value, scope)?,
        Definition::Privilege(privilege) => lower_privilege(privilege, &automation.value)?,
        Definition::SystemAccess(sa) => {
            let encoded = encode_access_value(&sa.model, &automation.value).ok_or_else(|| {
                LowerError::Unmappable {
                    path: automation.ui_path.display(),
                    reason: "value does not fit the system-access model".to_string(),
                }
            })?;
            vec![LowLevelAutomation::Secedit(SeceditAutomation {
                section: SeceditSection::SystemAccess,
                key: sa.inf_key.clone(),
                value: encoded,
            })]
        }
        Definition::RegistryValueInf(rv) => {
            let display = value_display_text(&automation.value).ok_or_else(|| {
                LowerError::Unmappable {
                    path: automation.ui_path.display(),
                    reason: "value is not a display option".to_string(),
                }
            })?;
            let wanted = normalize_display(&display);
            let encoded = rv
                .options
                .iter()
                .find(|(k, _)| normalize_display(k) == wanted)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| LowerError::Unmappable {
                    path: automation.ui_path.display(),
                    reason: format!("`{display}` is not an admissible option"),
                })?;
            vec![LowLevelAutomation::Secedit(SeceditAutomation {
                section: SeceditSection::RegistryValues,
                key: rv.inf_path.clone(),
                value: encoded,
            })]
        }
        Definition::Audit(audit) => {
            let audit_value = match &automation.value {
                PolicyValue::Audit(v) => *v,
                PolicyValue::Choice(s) => AuditValue::from_display(s).ok_or_else(|| {
                    LowerError::Unmappable {
                        path: automation.ui_path.display(),
                        reason: format!("`{s}` is not an audit setting"),
                    }
                })?,
                _ => {
                    return Err(LowerError::Unmappable {
                        path: automation.ui_path.display(),
                        reason: "audit subcategories take audit values".to_string(),
                    })
                }
            };
            vec![LowLevelAutomation::Audit(AuditAutomation {
                subcategory: audit.name.clone(),
                guid: audit.guid.clone(),
                setting_value: audit_value.code(),
            })]
        }
    };

    debug_assert!(!out.is_empty(), "checked automation lowered to nothing");
    Ok(out)
}

fn lower_privilege(
    privilege: &PrivilegeDef,
    value: &PolicyValue,
) -> Result<Vec<LowLevelAutomation>, LowerError> {
    let names = match value {
        PolicyValue::Principals(names) => names.clone(),
        other => {
            return Err(LowerError::Unmappable {
                path: privilege.ui_path.display(),
                reason: format!("privileges take account lists, got {}", other.kind_name()),
            })
        }
    };
    Ok(vec![LowLevelAutomation::Secedit(SeceditAutomation {
        section: SeceditSection::PrivilegeRights,
        key: privilege.constant.clone(),
        value: names.join(","),
    })])
}

fn lower_admx(
    setting: &SettingDefinition,
    value: &PolicyValue,
    scope: ConfigScope,
) -> Result<Vec<LowLevelAutomation>, LowerError> {
    let mut out = Vec::new();
    let reg = |value_name: &str, action: RegistryAction| {
        LowLevelAutomation::Registry(RegistryAutomation {
            scope,
            registry_key: setting.key.clone(),
            value_name: value_name.to_string(),
            action,
        })
    };
    let unmappable = |reason: String| LowerError::Unmappable {
        path: setting.ui_path.display(),
        reason,
    };

    match value {
        PolicyValue::Toggle(enabled) => {
            let data = if *enabled {
                setting.enabled_data.clone()
            } else {
                setting.disabled_data.clone()
            };
            let data = data.ok_or_else(|| {
                unmappable(format!(
                    "no {} data in the catalog entry",
                    if *enabled { "enabled" } else { "disabled" }
                ))
            })?;
            out.push(reg(&setting.value_name, RegistryAction::Set(data)));
            if !*enabled {
                // disabling clears the sub-setting values the policy owns
                for element in &setting.elements {
                    if !element.value_name.is_empty() {
                        out.push(reg(&element.value_name, RegistryAction::Delete));
                    }
                }
            }
        }
        PolicyValue::Choice(display) | PolicyValue::Text(display) => {
            let (element, data) = find_enum_item(setting, display)
                .ok_or_else(|| unmappable(format!("`{display}` matches no enum item")))?;
            out.push(reg(&element.value_name, RegistryAction::Set(data)));
        }
        PolicyValue::Number(n) => {
            let element = setting
                .elements
                .iter()
                .find(|e| matches!(e.kind, ElementKind::Decimal { .. }))
                .ok_or_else(|| unmappable("no numeric sub-setting".to_string()))?;
            out.push(reg(
                &element.value_name,
                RegistryAction::Set(RegistryData::Dword(*n as u32)),
            ));
        }
        PolicyValue::Composite { main, sub } => {
            out.extend(lower_admx(setting, main, scope)?);
            for (label, sub_value) in sub {
                let element = setting
                    .element_by_label(label)
                    .ok_or_else(|| unmappable(format!("no sub-setting labelled `{label}`")))?;
                out.extend(lower_element(setting, element, sub_value, scope)?);
            }
        }
        other => {
            return Err(unmappable(format!(
                "{} values do not apply to template-backed settings",
                other.kind_name()
            )))
        }
    }
    Ok(out)
}

fn find_enum_item<'a>(
    setting: &'a SettingDefinition,
    display: &str,
) -> Option<(&'a SettingElement, RegistryData)> {
    let wanted = normalize_display(display);
    for element in &setting.elements {
        if let ElementKind::Enum { items } = &element.kind {
            for (item_display, data) in items {
                if normalize_display(item_display) == wanted {
                    return Some((element, data.clone()));
                }
            }
        }
    }
    None
}

fn lower_element(
    setting: &SettingDefinition,
    element: &SettingElement,
    value: &PolicyValue,
    scope: ConfigScope,
) -> Result<Vec<LowLevelAutomation>, LowerError> {
    let unmappable = |reason: String| LowerError::Unmappable {
        path: setting.ui_path.display(),
        reason,
    };
    let reg = |key: String, value_name: String, action: RegistryAction| {
        LowLevelAutomation::Registry(RegistryAutomation {
            scope,
            registry_key: key,
            value_name,
            action,
        })
    };

    let automation = match (&element.kind, value) {
        (ElementKind::Enum { items }, value) => {
            let display = value_display_text(value)
                .ok_or_else(|| unmappable(format!("`{}` needs an option name", element.label)))?;
            let wanted = normalize_display(&display);
            let data = items
                .iter()
                .find(|(k, _)| normalize_display(k) == wanted)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| unmappable(format!("`{display}` matches no item of `{}`", element.label)))?;
            vec![reg(
                setting.key.clone(),
                element.value_name.clone(),
                RegistryAction::Set(data),
            )]
        }
        (ElementKind::Decimal { .. }, PolicyValue::Number(n)) => vec![reg(
            setting.key.clone(),
            element.value_name.clone(),
            RegistryAction::Set(RegistryData::Dword(*n as u32)),
        )],
        (ElementKind::Text { .. }, value) => {
            let text = value_display_text(value)
                .ok_or_else(|| unmappable(format!("`{}` needs text", element.label)))?;
            vec![reg(
                setting.key.clone(),
                element.value_name.clone(),
                RegistryAction::Set(RegistryData::Sz(text)),
            )]
        }
        (ElementKind::Boolean { true_data, false_data }, PolicyValue::Toggle(b)) => {
            let data = if *b { true_data.clone() } else { false_data.clone() };
            vec![reg(
                setting.key.clone(),
                element.value_name.clone(),
                RegistryAction::Set(data),
            )]
        }
        (ElementKind::List { key_suffix, .. }, PolicyValue::Principals(items)) => {
            // each entry becomes its own value under the list key, 1-based,
            // which is how group policy stores additive lists
            let key = if key_suffix.contains('\\') {
                key_suffix.clone()
            } else {
                format!("{}\\{}", setting.key, key_suffix)
            };
            items
                .iter()
                .enumerate()
                .map(|(i, item)| {
                    reg(
                        key.clone(),
                        format!("{}", i + 1),
                        RegistryAction::Set(RegistryData::Sz(item.clone())),
                    )
                })
                .collect()
        }
        (_, other) => {
            return Err(unmappable(format!(
                "{} value does not fit sub-setting `{}`",
                other.kind_name(),
                element.label
            )))
        }
    };
    Ok(automation)
}

/// The display text carried by choice-like values.
fn value_display_text(value: &PolicyValue) -> Option<String> {
    match value {
        PolicyValue::Choice(s) | PolicyValue::Text(s) => Some(s.clone()),
        PolicyValue::Toggle(true) => Some("Enabled".to_string()),
        PolicyValue::Toggle(false) => Some("Disabled".to_string()),
        PolicyValue::Audit(v) => Some(v.display().to_string()),
        PolicyValue::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn encode_access_value(model: &AccessModel, value: &PolicyValue) -> Option<String> {
    match model {
        AccessModel::Integer { min, max } => match value {
            PolicyValue::Number(n) if n >= min && n <= max => Some(n.to_string()),
            _ => None,
        },
        AccessModel::Enum { options } => {
            let display = value_display_text(value)?;
            let wanted = normalize_display(&display);
            options
                .iter()
                .find(|(k, _)| normalize_display(k) == wanted)
                .map(|(_, v)| v.clone())
        }
    }
}

/// Outcome of lowering a whole guide.
#[derive(Debug, Default)]
pub struct LowerReport {
    pub lowered_rules: usize,
    pub errors: Vec<(String, String)>,
}

/// Lower every checked automation in the guide, replacing any low-level
/// automations from earlier runs. Per-rule failures are collected, never
/// fatal for the rest of the guide.
pub fn lower_guide(catalog: &SettingCatalog, guide: &mut Guide) -> LowerReport {
    let mut report = LowerReport::default();
    for rule in &mut guide.rules {
        match lower_rule(catalog, rule) {
            Ok(true) => report.lowered_rules += 1,
            Ok(false) => {}
            Err(e) => report.errors.push((rule.id.clone(), e.to_string())),
        }
    }
    report
}

fn lower_rule(catalog: &SettingCatalog, rule: &mut Rule) -> Result<bool, LowerError> {
    let mut lowered_any = false;
    for implementation in &mut rule.implementations {
        let mut lowered = Vec::new();
        let mut has_checked = false;
        for automation in &implementation.automations {
            if let Automation::WinGpo(gpo) = automation {
                if gpo.verification_status == VerificationStatus::Checked {
                    has_checked = true;
                    lowered.extend(lower_automation(catalog, gpo)?);
                }
            }
        }
        if !has_checked {
            continue;
        }
        // replace, never append: a second lowering run must be a no-op
        implementation
            .automations
            .retain(|a| !matches!(a, Automation::LowLevel(_)));
        implementation
            .automations
            .extend(lowered.into_iter().map(Automation::LowLevel));
        lowered_any = true;
    }
    Ok(lowered_any)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_catalog;
    use crate::paths::PolicyPath;
    use crate::registry::{Hive, RegistryValueType};
    use indexmap::IndexMap;

    fn uac_definition() -> Definition {
        Definition::Admx(SettingDefinition {
            id: "securityoptions__uac_network_logons".into(),
            ui_path: PolicyPath::parse(
                "Computer Configuration\\Administrative Templates\\MS Security Guide\\Apply UAC restrictions to local accounts on network logons",
            )
            .unwrap(),
            hive: Hive::LocalMachine,
            key: "SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\Policies\\System".into(),
            value_name: "LocalAccountTokenFilterPolicy".into(),
            value_type: RegistryValueType::Dword,
            enabled_data: Some(RegistryData::Dword(0)),
            disabled_data: Some(RegistryData::Dword(1)),
            elements: vec![],
            automatable: true,
        })
    }

    fn checked(path: &str, value: PolicyValue) -> WinGpoAutomation {
        WinGpoAutomation {
            ui_path: PolicyPath::parse(path).unwrap(),
            value,
            verification_status: VerificationStatus::Checked,
            error_class: None,
            error_hint: None,
            candidates: None,
        }
    }

    #[test]
    fn uac_rule_lowers_to_dword_zero() {
        let catalog = build_catalog([uac_definition()]).unwrap();
        let automation = checked(
            "Computer Configuration\\Administrative Templates\\MS Security Guide\\Apply UAC restrictions to local accounts on network logons",
            PolicyValue::Toggle(true),
        );
        let lowered = lower_automation(&catalog, &automation).unwrap();
        assert_eq!(
            lowered,
            vec![LowLevelAutomation::Registry(RegistryAutomation {
                scope: ConfigScope::Computer,
                registry_key: "SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\Policies\\System"
                    .into(),
                value_name: "LocalAccountTokenFilterPolicy".into(),
                action: RegistryAction::Set(RegistryData::Dword(0)),
            })]
        );
    }

    #[test]
    fn unchecked_automation_is_a_precondition_error() {
        let catalog = build_catalog([uac_definition()]).unwrap();
        let mut automation = checked(
            "Computer Configuration\\Administrative Templates\\MS Security Guide\\Apply UAC restrictions to local accounts on network logons",
            PolicyValue::Toggle(true),
        );
        automation.verification_status = VerificationStatus::Unchecked;
        assert!(matches!(
            lower_automation(&catalog, &automation),
            Err(LowerError::Precondition(_))
        ));
    }

    #[test]
    fn vanished_catalog_entry_is_a_consistency_error() {
        let catalog = build_catalog([]).unwrap();
        let automation = checked("Computer Configuration\\X\\Y", PolicyValue::Toggle(true));
        assert!(matches!(
            lower_automation(&catalog, &automation),
            Err(LowerError::Consistency(_))
        ));
    }

    #[test]
    fn principals_lower_to_privilege_rights_line() {
        let catalog = build_catalog([Definition::Privilege(PrivilegeDef {
            ui_path: PolicyPath::parse(
                "Computer Configuration\\Windows Settings\\Security Settings\\Local Policies\\User Rights Assignment\\Back up files and directories",
            )
            .unwrap(),
            constant: "SeBackupPrivilege".into(),
        })])
        .unwrap();
        let automation = checked(
            "Computer Configuration\\Policies\\Windows Settings\\Security Settings\\Local Policies\\User Rights Assignment\\Back up files and directories",
            PolicyValue::Principals(vec!["Administrators".into()]),
        );
        let lowered = lower_automation(&catalog, &automation).unwrap();
        assert_eq!(
            lowered,
            vec![LowLevelAutomation::Secedit(SeceditAutomation {
                section: SeceditSection::PrivilegeRights,
                key: "SeBackupPrivilege".into(),
                value: "Administrators".into(),
            })]
        );
    }

    #[test]
    fn guide_without_checked_rules_stays_untouched() {
        let catalog = build_catalog([uac_definition()]).unwrap();
        let mut guide = crate::guide::Guide::new("Test", crate::guide::GuideSource::Scapolite);
        let mut rule = crate::guide::Rule::new("R1", "Unverified rule.");
        let mut automation = checked(
            "Computer Configuration\\Administrative Templates\\MS Security Guide\\Apply UAC restrictions to local accounts on network logons",
            PolicyValue::Toggle(true),
        );
        automation.verification_status = VerificationStatus::Unchecked;
        rule.implementations.push(crate::guide::Implementation {
            description: String::new(),
            automations: vec![Automation::WinGpo(automation)],
        });
        guide.rules.push(rule);
        let before = guide.clone();
        let report = lower_guide(&catalog, &mut guide);
        assert_eq!(report.lowered_rules, 0);
        assert!(report.errors.is_empty());
        assert_eq!(guide, before);
    }

    #[test]
    fn disable_emits_delete_for_element_values() {
        let mut items = IndexMap::new();
        items.insert("Enable driver".to_string(), RegistryData::Dword(2));
        items.insert(
            "Disable driver (recommended)".to_string(),
            RegistryData::Dword(4),
        );
        let def = Definition::Admx(SettingDefinition {
            id: "secguide__smb1client".into(),
            ui_path: PolicyPath::parse(
                "Computer Configuration\\Administrative Templates\\MS Security Guide\\Configure SMBv1 client driver",
            )
            .unwrap(),
            hive: Hive::LocalMachine,
            key: "SYSTEM\\CurrentControlSet\\Services\\MrxSmb10".into(),
            value_name: "PolicyState".into(),
            value_type: RegistryValueType::Dword,
            enabled_data: Some(RegistryData::Dword(1)),
            disabled_data: Some(RegistryData::Dword(0)),
            elements: vec![SettingElement {
                element_id: "Pol_SecGuide_SMB1ClientDriver".into(),
                label: "Configure MrxSmb10 driver".into(),
                value_name: "Start".into(),
                kind: ElementKind::Enum { items },
            }],
            automatable: true,
        });
        let catalog = build_catalog([def]).unwrap();
        let path = "Computer Configuration\\Administrative Templates\\MS Security Guide\\Configure SMBv1 client driver";

        let disable = lower_automation(&catalog, &checked(path, PolicyValue::Toggle(false))).unwrap();
        assert_eq!(disable.len(), 2);
        assert!(matches!(
            &disable[1],
            LowLevelAutomation::Registry(RegistryAutomation {
                action: RegistryAction::Delete,
                value_name,
                ..
            }) if value_name == "Start"
        ));

        let composite = lower_automation(
            &catalog,
            &checked(
                path,
                PolicyValue::Composite {
                    main: Box::new(PolicyValue::Toggle(true)),
                    sub: vec![(
                        "Configure MrxSmb10 driver".into(),
                        PolicyValue::Choice("Disable driver (recommended)".into()),
                    )],
                },
            ),
        )
        .unwrap();
        assert_eq!(composite.len(), 2);
        assert!(matches!(
            &composite[1],
            LowLevelAutomation::Registry(RegistryAutomation {
                action: RegistryAction::Set(RegistryData::Dword(4)),
                ..
            })
        ));
    }
}
