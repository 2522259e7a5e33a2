//! The YAML/Markdown guide file format.
//!
//! A guide file starts with a YAML header (`title`, `source`), then carries
//! one document pair per rule, separated by `---` lines: first the rule's
//! YAML object, then a Markdown block whose level-2 headings are
//! JSON-pointer-like paths into that rule object:
//!
//! ```text
//! title: Example guide
//! source: scapolite
//! ---
//! id: SV-88407
//! implementations:
//! - automations:
//!   - system: org.scapolite.implementation.win_gpo
//!     ui_path: Computer Configuration\...\Back up files and directories
//!     value:
//!     - Administrators
//!     verification_status: Unchecked.
//! ---
//! ## /rule
//! The Backup files and directories user right must only be assigned to ...
//!
//! ## /implementations/0/description
//! Configure the policy value for ...
//! ```
//!
//! A file whose first document is a rule object (it has an `id` instead of a
//! `title`) is accepted as a headerless single-rule guide. Long prose always
//! serializes into the Markdown block; unknown pointers survive round-trips
//! verbatim.

use super::value::{policy_value_from_yaml, policy_value_to_yaml};
use super::{
    Automation, Candidates, ExtractionStatus, Guide, GuideError, GuideSource, Implementation,
    Rule, VerificationStatus, WinGpoAutomation, SYSTEM_WIN_GPO,
};
use crate::lower::{
    AuditAutomation, ConfigScope, LowLevelAutomation, RegistryAction, RegistryAutomation,
    SeceditAutomation, SeceditSection, SYSTEM_WINDOWS_AUDIT, SYSTEM_WINDOWS_REGISTRY,
    SYSTEM_WINDOWS_SECEDIT,
};
use crate::paths::PolicyPath;
use serde_yaml::{Mapping, Value};

/// Parse a guide file. Markdown sections override inline YAML prose fields.
pub fn parse_scapolite(text: &str) -> Result<Guide, GuideError> {
    let blocks = split_blocks(text);
    if blocks.is_empty() {
        return Err(GuideError::Schema("guide file is empty".to_string()));
    }

    let first_yaml = parse_yaml_block(&blocks[0])?;
    let (mut guide, rule_blocks) = if yaml_has_key(&first_yaml, "id") {
        // headerless single-rule document
        (Guide::new("", GuideSource::Scapolite), &blocks[..])
    } else {
        let header = &first_yaml;
        let title = yaml_str(header, "title").unwrap_or_default();
        let source = match yaml_str(header, "source").as_deref() {
            Some("xccdf") => GuideSource::Xccdf,
            _ => GuideSource::Scapolite,
        };
        (Guide::new(title, source), &blocks[1..])
    };

    let mut iter = rule_blocks.iter();
    while let Some(yaml_block) = iter.next() {
        if yaml_block.text.trim().is_empty() && iter.len() == 0 {
            break; // trailing separator
        }
        let markdown = iter.next();
        let yaml = parse_yaml_block(yaml_block)?;
        let mut rule = rule_from_yaml(&yaml, yaml_block.first_line)?;
        if let Some(markdown) = markdown {
            merge_markdown(&mut rule, &markdown.text, markdown.first_line)?;
        }
        guide.rules.push(rule);
    }

    guide.validate_rule_ids()?;
    Ok(guide)
}

/// Serialize a guide; the inverse of [`parse_scapolite`] up to canonical
/// value forms. Prose bodies must not contain a bare `---` line.
pub fn serialize_scapolite(guide: &Guide) -> String {
    let mut out = String::new();
    let mut header = Mapping::new();
    header.insert("title".into(), Value::String(guide.title.clone()));
    header.insert(
        "source".into(),
        Value::String(guide.source.to_string()),
    );
    out.push_str(&emit_yaml(&Value::Mapping(header)));
    for rule in &guide.rules {
        out.push_str("---\n");
        out.push_str(&emit_yaml(&rule_to_yaml(rule)));
        out.push_str("---\n");
        out.push_str(&rule_markdown(rule));
    }
    out
}

fn emit_yaml(value: &Value) -> String {
    serde_yaml::to_string(value).expect("guide yaml serializes")
}

struct Block {
    text: String,
    first_line: usize,
}

fn split_blocks(text: &str) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    let mut start = 1;
    for (index, line) in text.lines().enumerate() {
        if line.trim_end() == "---" {
            blocks.push(Block {
                text: std::mem::take(&mut current),
                first_line: start,
            });
            start = index + 2;
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.trim().is_empty() || blocks.is_empty() {
        blocks.push(Block {
            text: current,
            first_line: start,
        });
    }
    blocks
}

fn parse_yaml_block(block: &Block) -> Result<Mapping, GuideError> {
    if block.text.trim().is_empty() {
        return Ok(Mapping::new());
    }
    let value: Value = serde_yaml::from_str(&block.text).map_err(|e| GuideError::Parse {
        message: e.to_string(),
        location: match e.location() {
            Some(l) => format!("line {}", block.first_line + l.line().saturating_sub(1)),
            None => format!("line {}", block.first_line),
        },
    })?;
    match value {
        Value::Mapping(mapping) => Ok(mapping),
        other => Err(GuideError::Parse {
            message: format!("expected a YAML mapping, got {other:?}"),
            location: format!("line {}", block.first_line),
        }),
    }
}

fn yaml_has_key(mapping: &Mapping, key: &str) -> bool {
    mapping.contains_key(Value::String(key.to_string()))
}

fn yaml_str(mapping: &Mapping, key: &str) -> Option<String> {
    match mapping.get(Value::String(key.to_string()))? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn rule_from_yaml(yaml: &Mapping, line: usize) -> Result<Rule, GuideError> {
    let id = yaml_str(yaml, "id").ok_or_else(|| GuideError::Schema(format!(
        "rule near line {line} has no id"
    )))?;
    let mut rule = Rule::new(id, yaml_str(yaml, "rule").unwrap_or_default());
    rule.description = yaml_str(yaml, "description");
    rule.extraction_note = yaml_str(yaml, "extraction_note");
    rule.check = yaml_str(yaml, "check");
    if let Some(status) = yaml_str(yaml, "extraction_status") {
        rule.extraction_status = ExtractionStatus::from_wire(&status).ok_or_else(|| {
            GuideError::Schema(format!(
                "rule `{}`: unknown extraction status `{status}`",
                rule.id
            ))
        })?;
    }
    if let Some(implementations) = yaml.get(Value::String("implementations".into())) {
        let list = implementations.as_sequence().ok_or_else(|| {
            GuideError::Schema(format!("rule `{}`: implementations must be a list", rule.id))
        })?;
        for entry in list {
            let mapping = entry.as_mapping().ok_or_else(|| {
                GuideError::Schema(format!(
                    "rule `{}`: implementation entries must be mappings",
                    rule.id
                ))
            })?;
            rule.implementations
                .push(implementation_from_yaml(mapping, &rule.id)?);
        }
    }
    Ok(rule)
}

fn implementation_from_yaml(yaml: &Mapping, rule_id: &str) -> Result<Implementation, GuideError> {
    let mut implementation = Implementation {
        description: yaml_str(yaml, "description").unwrap_or_default(),
        automations: Vec::new(),
    };
    if let Some(automations) = yaml.get(Value::String("automations".into())) {
        let list = automations.as_sequence().ok_or_else(|| {
            GuideError::Schema(format!("rule `{rule_id}`: automations must be a list"))
        })?;
        for entry in list {
            let mapping = entry.as_mapping().ok_or_else(|| {
                GuideError::Schema(format!("rule `{rule_id}`: automations must be mappings"))
            })?;
            implementation
                .automations
                .push(automation_from_yaml(mapping, rule_id)?);
        }
    }
    Ok(implementation)
}

fn require_str(yaml: &Mapping, key: &str, rule_id: &str) -> Result<String, GuideError> {
    yaml_str(yaml, key).ok_or_else(|| {
        GuideError::Schema(format!("rule `{rule_id}`: automation is missing `{key}`"))
    })
}

fn automation_from_yaml(yaml: &Mapping, rule_id: &str) -> Result<Automation, GuideError> {
    let system = require_str(yaml, "system", rule_id)?;
    match system.as_str() {
        SYSTEM_WIN_GPO => {
            let path_text = require_str(yaml, "ui_path", rule_id)?;
            let ui_path = PolicyPath::parse(&path_text).map_err(|e| {
                GuideError::Schema(format!("rule `{rule_id}`: {e}"))
            })?;
            let value_yaml = yaml
                .get(Value::String("value".into()))
                .ok_or_else(|| {
                    GuideError::Schema(format!("rule `{rule_id}`: automation is missing `value`"))
                })?;
            let value = policy_value_from_yaml(value_yaml)?;
            let mut automation = WinGpoAutomation::new(ui_path, value);
            if let Some(status) = yaml_str(yaml, "verification_status") {
                automation.verification_status = parse_verification_status(&status, rule_id)?;
            }
            automation.error_class = yaml_str(yaml, "error_class");
            automation.error_hint = yaml_str(yaml, "error_hint");
            if let Some(candidates) = yaml.get(Value::String("candidates".into())) {
                automation.candidates = Some(candidates_from_yaml(candidates, rule_id)?);
            }
            Ok(Automation::WinGpo(automation))
        }
        SYSTEM_WINDOWS_REGISTRY => {
            let scope = match require_str(yaml, "config", rule_id)?.as_str() {
                "Computer" => ConfigScope::Computer,
                "User" => ConfigScope::User,
                other => {
                    return Err(GuideError::Schema(format!(
                        "rule `{rule_id}`: unknown config scope `{other}`"
                    )))
                }
            };
            let action_text = require_str(yaml, "action", rule_id)?;
            let action = RegistryAction::decode(&action_text)
                .map_err(|e| GuideError::Schema(format!("rule `{rule_id}`: {e}")))?;
            Ok(Automation::LowLevel(LowLevelAutomation::Registry(
                RegistryAutomation {
                    scope,
                    registry_key: require_str(yaml, "registry_key", rule_id)?,
                    value_name: require_str(yaml, "value_name", rule_id)?,
                    action,
                },
            )))
        }
        SYSTEM_WINDOWS_SECEDIT => {
            let section_text = require_str(yaml, "section", rule_id)?;
            let section = SeceditSection::from_heading(&section_text).ok_or_else(|| {
                GuideError::Schema(format!(
                    "rule `{rule_id}`: unknown security-template section `{section_text}`"
                ))
            })?;
            Ok(Automation::LowLevel(LowLevelAutomation::Secedit(
                SeceditAutomation {
                    section,
                    key: require_str(yaml, "key", rule_id)?,
                    value: require_str(yaml, "value", rule_id)?,
                },
            )))
        }
        SYSTEM_WINDOWS_AUDIT => {
            let setting_value = yaml
                .get(Value::String("setting_value".into()))
                .and_then(|v| v.as_u64())
                .filter(|v| *v <= 3)
                .ok_or_else(|| {
                    GuideError::Schema(format!(
                        "rule `{rule_id}`: audit setting_value must be 0..3"
                    ))
                })?;
            Ok(Automation::LowLevel(LowLevelAutomation::Audit(
                AuditAutomation {
                    subcategory: require_str(yaml, "subcategory", rule_id)?,
                    guid: require_str(yaml, "guid", rule_id)?,
                    setting_value: setting_value as u8,
                },
            )))
        }
        _ => {
            let mut body = yaml.clone();
            body.remove(Value::String("system".into()));
            Ok(Automation::Opaque { system, body })
        }
    }
}

fn parse_verification_status(text: &str, rule_id: &str) -> Result<VerificationStatus, GuideError> {
    match text.trim_end_matches('.').to_lowercase().as_str() {
        "checked" => Ok(VerificationStatus::Checked),
        "unchecked" => Ok(VerificationStatus::Unchecked),
        other => Err(GuideError::Schema(format!(
            "rule `{rule_id}`: unknown verification status `{other}`"
        ))),
    }
}

fn candidates_from_yaml(value: &Value, rule_id: &str) -> Result<Candidates, GuideError> {
    match value {
        Value::Sequence(items) => Ok(Candidates::List(
            items
                .iter()
                .map(|v| {
                    v.as_str().map(str::to_string).ok_or_else(|| {
                        GuideError::Schema(format!(
                            "rule `{rule_id}`: candidate entries must be strings"
                        ))
                    })
                })
                .collect::<Result<_, _>>()?,
        )),
        Value::Mapping(mapping) => {
            let mut per_element = Vec::new();
            for (key, val) in mapping {
                let label = key.as_str().unwrap_or_default().to_string();
                let options = val
                    .as_sequence()
                    .map(|seq| {
                        seq.iter()
                            .filter_map(|v| v.as_str().map(str::to_string))
                            .collect::<Vec<_>>()
                    })
                    .unwrap_or_default();
                per_element.push((label, options));
            }
            Ok(Candidates::PerElement(per_element))
        }
        _ => Err(GuideError::Schema(format!(
            "rule `{rule_id}`: candidates must be a list or a mapping"
        ))),
    }
}

fn rule_to_yaml(rule: &Rule) -> Value {
    let mut yaml = Mapping::new();
    yaml.insert("id".into(), Value::String(rule.id.clone()));
    if rule.extraction_status != ExtractionStatus::NotAttempted {
        yaml.insert(
            "extraction_status".into(),
            Value::String(rule.extraction_status.wire_name().to_string()),
        );
    }
    if let Some(note) = &rule.extraction_note {
        yaml.insert("extraction_note".into(), Value::String(note.clone()));
    }
    if let Some(check) = &rule.check {
        yaml.insert("check".into(), Value::String(check.clone()));
    }
    if !rule.implementations.is_empty() {
        yaml.insert(
            "implementations".into(),
            Value::Sequence(
                rule.implementations
                    .iter()
                    .map(implementation_to_yaml)
                    .collect(),
            ),
        );
    }
    Value::Mapping(yaml)
}

fn implementation_to_yaml(implementation: &Implementation) -> Value {
    let mut yaml = Mapping::new();
    if !implementation.automations.is_empty() {
        yaml.insert(
            "automations".into(),
            Value::Sequence(
                implementation
                    .automations
                    .iter()
                    .map(automation_to_yaml)
                    .collect(),
            ),
        );
    }
    Value::Mapping(yaml)
}

fn automation_to_yaml(automation: &Automation) -> Value {
    let mut yaml = Mapping::new();
    match automation {
        Automation::WinGpo(gpo) => {
            yaml.insert("system".into(), Value::String(SYSTEM_WIN_GPO.to_string()));
            yaml.insert("ui_path".into(), Value::String(gpo.ui_path.display()));
            yaml.insert("value".into(), policy_value_to_yaml(&gpo.value));
            yaml.insert(
                "verification_status".into(),
                Value::String(match gpo.verification_status {
                    VerificationStatus::Checked => "Checked.".to_string(),
                    VerificationStatus::Unchecked => "Unchecked.".to_string(),
                }),
            );
            if let Some(error_class) = &gpo.error_class {
                yaml.insert("error_class".into(), Value::String(error_class.clone()));
            }
            if let Some(error_hint) = &gpo.error_hint {
                yaml.insert("error_hint".into(), Value::String(error_hint.clone()));
            }
            if let Some(candidates) = &gpo.candidates {
                yaml.insert("candidates".into(), candidates_to_yaml(candidates));
            }
        }
        Automation::LowLevel(LowLevelAutomation::Registry(reg)) => {
            yaml.insert(
                "system".into(),
                Value::String(SYSTEM_WINDOWS_REGISTRY.to_string()),
            );
            yaml.insert("config".into(), Value::String(reg.scope.to_string()));
            yaml.insert(
                "registry_key".into(),
                Value::String(reg.registry_key.clone()),
            );
            yaml.insert("value_name".into(), Value::String(reg.value_name.clone()));
            yaml.insert("action".into(), Value::String(reg.action.encode()));
        }
        Automation::LowLevel(LowLevelAutomation::Secedit(sec)) => {
            yaml.insert(
                "system".into(),
                Value::String(SYSTEM_WINDOWS_SECEDIT.to_string()),
            );
            yaml.insert(
                "section".into(),
                Value::String(sec.section.heading().to_string()),
            );
            yaml.insert("key".into(), Value::String(sec.key.clone()));
            yaml.insert("value".into(), Value::String(sec.value.clone()));
        }
        Automation::LowLevel(LowLevelAutomation::Audit(audit)) => {
            yaml.insert(
                "system".into(),
                Value::String(SYSTEM_WINDOWS_AUDIT.to_string()),
            );
            yaml.insert(
                "subcategory".into(),
                Value::String(audit.subcategory.clone()),
            );
            yaml.insert("guid".into(), Value::String(audit.guid.clone()));
            yaml.insert(
                "setting_value".into(),
                Value::Number(audit.setting_value.into()),
            );
        }
        Automation::Opaque { system, body } => {
            yaml.insert("system".into(), Value::String(system.clone()));
            for (key, value) in body {
                yaml.insert(key.clone(), value.clone());
            }
        }
    }
    Value::Mapping(yaml)
}

fn candidates_to_yaml(candidates: &Candidates) -> Value {
    match candidates {
        Candidates::List(items) => Value::Sequence(
            items.iter().map(|s| Value::String(s.clone())).collect(),
        ),
        Candidates::PerElement(entries) => {
            let mut mapping = Mapping::new();
            for (label, options) in entries {
                mapping.insert(
                    Value::String(label.clone()),
                    Value::Sequence(options.iter().map(|s| Value::String(s.clone())).collect()),
                );
            }
            Value::Mapping(mapping)
        }
    }
}

/// Markdown block for one rule: prose fields as pointer-headed sections.
fn rule_markdown(rule: &Rule) -> String {
    let mut out = String::new();
    let mut push_section = |pointer: &str, body: &str| {
        out.push_str("## ");
        out.push_str(pointer);
        out.push('\n');
        out.push_str(body.trim_end());
        out.push_str("\n\n");
    };
    if !rule.rule_text.is_empty() {
        push_section("/rule", &rule.rule_text);
    }
    if let Some(description) = &rule.description {
        push_section("/description", description);
    }
    for (index, implementation) in rule.implementations.iter().enumerate() {
        if !implementation.description.is_empty() {
            push_section(
                &format!("/implementations/{index}/description"),
                &implementation.description,
            );
        }
    }
    for (pointer, body) in &rule.extra_sections {
        push_section(pointer, body);
    }
    out
}

fn merge_markdown(rule: &mut Rule, markdown: &str, first_line: usize) -> Result<(), GuideError> {
    for (pointer, body) in split_markdown_sections(markdown) {
        if pointer == "/rule" {
            rule.rule_text = body;
        } else if pointer == "/description" {
            rule.description = Some(body);
        } else if let Some(rest) = pointer.strip_prefix("/implementations/") {
            match rest.split_once('/') {
                Some((index_text, "description")) => {
                    let index: usize = index_text.parse().map_err(|_| {
                        GuideError::Schema(format!(
                            "rule `{}`: bad pointer `{pointer}` near line {first_line}",
                            rule.id
                        ))
                    })?;
                    // appending right after the last entry is allowed, holes are not
                    if index > rule.implementations.len() {
                        return Err(GuideError::Schema(format!(
                            "rule `{}`: pointer `{pointer}` references implementation {index} but only {} exist",
                            rule.id,
                            rule.implementations.len()
                        )));
                    }
                    if index == rule.implementations.len() {
                        rule.implementations.push(Implementation::default());
                    }
                    rule.implementations[index].description = body;
                }
                _ => rule.extra_sections.push((pointer, body)),
            }
        } else {
            rule.extra_sections.push((pointer, body));
        }
    }
    Ok(())
}

fn split_markdown_sections(markdown: &str) -> Vec<(String, String)> {
    let mut sections: Vec<(String, String)> = Vec::new();
    let mut pointer: Option<String> = None;
    let mut body = String::new();
    let flush = |pointer: &mut Option<String>, body: &mut String, out: &mut Vec<(String, String)>| {
        let text = std::mem::take(body);
        let trimmed = text.trim_matches('\n').trim_end().to_string();
        match pointer.take() {
            Some(p) => out.push((p, trimmed)),
            None if !trimmed.is_empty() => out.push((String::new(), trimmed)),
            None => {}
        }
    };
    for line in markdown.lines() {
        if let Some(heading) = line.strip_prefix("## ") {
            flush(&mut pointer, &mut body, &mut sections);
            pointer = Some(heading.trim().to_string());
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    flush(&mut pointer, &mut body, &mut sections);
    sections
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guide::PolicyValue;

    /// The user-rights example rule, as it appears in a guide repository.
    const BACKUP_RULE: &str = r#"id: SV-88407
implementations:
- automations:
  - system: org.scapolite.implementation.win_gpo
    ui_path: 'Computer Configuration\Policies\Windows Settings\Security Settings\Local Policies\User Rights Assignment\Back up files and directories'
    value:
    - Administrators
---

## /rule
The Backup files and directories user right must only be assigned to the Administrators group.

## /implementations/0/description
Configure the policy value for Computer Configuration >> Windows Settings >> Security Settings >> Local Policies >> User Rights Assignment >> "Back up files and directories" to include only the following accounts or groups:
- Administrators
"#;

    #[test]
    fn parses_the_backup_rule_document() {
        let guide = parse_scapolite(BACKUP_RULE).unwrap();
        assert_eq!(guide.rules.len(), 1);
        let rule = &guide.rules[0];
        assert_eq!(rule.id, "SV-88407");
        assert!(rule.rule_text.starts_with("The Backup files"));
        assert_eq!(rule.implementations.len(), 1);
        assert!(rule.implementations[0]
            .description
            .ends_with("- Administrators"));
        let automations: Vec<_> = rule.win_gpo_automations().collect();
        assert_eq!(automations.len(), 1);
        assert_eq!(
            automations[0].value,
            PolicyValue::Principals(vec!["Administrators".to_string()])
        );
        assert_eq!(
            automations[0].verification_status,
            VerificationStatus::Unchecked
        );
        // the Policies segment normalizes away
        assert_eq!(
            automations[0].ui_path.segments[0],
            "Windows Settings"
        );
    }

    #[test]
    fn round_trips_the_backup_rule() {
        let guide = parse_scapolite(BACKUP_RULE).unwrap();
        let serialized = serialize_scapolite(&guide);
        let reparsed = parse_scapolite(&serialized).unwrap();
        assert_eq!(guide, reparsed);
        // and serialization is a fixpoint
        assert_eq!(serialized, serialize_scapolite(&reparsed));
    }

    #[test]
    fn empty_rules_list_gives_empty_guide() {
        let guide = parse_scapolite("title: Empty guide\nsource: scapolite\n").unwrap();
        assert!(guide.rules.is_empty());
        assert_eq!(guide.title, "Empty guide");
        let round = parse_scapolite(&serialize_scapolite(&guide)).unwrap();
        assert_eq!(guide, round);
    }

    #[test]
    fn duplicate_rule_ids_are_rejected_with_both_locations() {
        let text = "title: T\n---\nid: A\n---\n## /rule\nOne.\n---\nid: A\n---\n## /rule\nTwo.\n";
        let err = parse_scapolite(text).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("duplicate rule id `A`"), "{message}");
        assert!(message.contains("0") && message.contains("1"), "{message}");
    }

    #[test]
    fn unknown_pointer_sections_survive_round_trips() {
        let text = "title: T\n---\nid: A\n---\n## /rule\nBody.\n\n## /rationale\nBecause.\n";
        let guide = parse_scapolite(text).unwrap();
        assert_eq!(
            guide.rules[0].extra_sections,
            vec![("/rationale".to_string(), "Because.".to_string())]
        );
        let round = parse_scapolite(&serialize_scapolite(&guide)).unwrap();
        assert_eq!(guide, round);
    }

    #[test]
    fn out_of_range_implementation_pointer_is_a_schema_error() {
        let text = "title: T\n---\nid: A\n---\n## /rule\nBody.\n\n## /implementations/3/description\nNope.\n";
        match parse_scapolite(text) {
            Err(GuideError::Schema(msg)) => assert!(msg.contains("/implementations/3/description")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn yaml_error_carries_a_line_number() {
        let text = "title: T\n---\nid: [unterminated\n---\n## /rule\nBody.\n";
        match parse_scapolite(text) {
            Err(GuideError::Parse { location, .. }) => assert!(location.contains("line")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn checked_status_with_trailing_dot_parses() {
        let text = "title: T\n---\nid: A\nimplementations:\n- automations:\n  - system: org.scapolite.implementation.win_gpo\n    ui_path: Computer Configuration\\X\\Y\n    value: Enabled\n    verification_status: Checked.\n---\n## /rule\nBody.\n";
        let guide = parse_scapolite(text).unwrap();
        let automation = guide.rules[0].win_gpo_automations().next().unwrap();
        assert_eq!(automation.verification_status, VerificationStatus::Checked);
        assert_eq!(automation.value, PolicyValue::Toggle(true));
    }

    #[test]
    fn unknown_automation_systems_are_preserved_opaquely() {
        let text = "title: T\n---\nid: A\nimplementations:\n- automations:\n  - system: org.example.future_system\n    anything: goes\n---\n## /rule\nBody.\n";
        let guide = parse_scapolite(text).unwrap();
        match &guide.rules[0].implementations[0].automations[0] {
            Automation::Opaque { system, body } => {
                assert_eq!(system, "org.example.future_system");
                assert_eq!(body.len(), 1);
            }
            other => panic!("expected opaque automation, got {other:?}"),
        }
        let round = parse_scapolite(&serialize_scapolite(&guide)).unwrap();
        assert_eq!(guide, round);
    }

    #[test]
    fn low_level_automations_round_trip_in_guide_layout() {
        let text = "title: T\n---\nid: A\nimplementations:\n- automations:\n  - system: org.scapolite.implementation.windows_registry\n    config: Computer\n    registry_key: SOFTWARE\\Microsoft\\Windows\\CurrentVersion\\Policies\\System\n    value_name: LocalAccountTokenFilterPolicy\n    action: DWORD:0\n---\n## /rule\nBody.\n";
        let guide = parse_scapolite(text).unwrap();
        let low: Vec<_> = guide.rules[0].low_level_automations().collect();
        assert_eq!(low.len(), 1);
        match low[0] {
            LowLevelAutomation::Registry(reg) => {
                assert_eq!(reg.value_name, "LocalAccountTokenFilterPolicy");
                assert_eq!(reg.action, RegistryAction::Set(crate::registry::RegistryData::Dword(0)));
            }
            other => panic!("expected registry automation, got {other:?}"),
        }
        let serialized = serialize_scapolite(&guide);
        assert!(serialized.contains("action: DWORD:0"));
        assert_eq!(parse_scapolite(&serialized).unwrap(), guide);
    }
}
