//! YAML representation of policy values.
//!
//! The wire forms, matching how guide prose spells values:
//! - `Enabled` / `Disabled` strings are toggles
//! - integers are numbers
//! - `Success`, `Failure`, `Success and Failure`, `No Auditing` are audit values
//! - any other string is a choice
//! - a sequence of strings is an account list
//! - a mapping with a `main_setting` key is a composite value
//!
//! Parsing canonicalizes: free text comes back as `Choice`, which validation
//! and lowering treat interchangeably with `Text`.

use super::{AuditValue, GuideError, PolicyValue};
use serde_yaml::Value;

pub const MAIN_SETTING_KEY: &str = "main_setting";

pub fn policy_value_to_yaml(value: &PolicyValue) -> Value {
    match value {
        PolicyValue::Toggle(true) => Value::String("Enabled".to_string()),
        PolicyValue::Toggle(false) => Value::String("Disabled".to_string()),
        PolicyValue::Number(n) => Value::Number((*n).into()),
        PolicyValue::Choice(s) | PolicyValue::Text(s) => Value::String(s.clone()),
        PolicyValue::Principals(names) => Value::Sequence(
            names
                .iter()
                .map(|n| Value::String(n.clone()))
                .collect(),
        ),
        PolicyValue::Audit(v) => Value::String(v.display().to_string()),
        PolicyValue::Composite { main, sub } => {
            let mut mapping = serde_yaml::Mapping::new();
            mapping.insert(
                Value::String(MAIN_SETTING_KEY.to_string()),
                policy_value_to_yaml(main),
            );
            for (label, sub_value) in sub {
                mapping.insert(Value::String(label.clone()), policy_value_to_yaml(sub_value));
            }
            Value::Mapping(mapping)
        }
    }
}

pub fn policy_value_from_yaml(value: &Value) -> Result<PolicyValue, GuideError> {
    match value {
        Value::Bool(b) => Ok(PolicyValue::Toggle(*b)),
        Value::Number(n) => n
            .as_i64()
            .map(PolicyValue::Number)
            .ok_or_else(|| GuideError::Schema(format!("value `{n}` is not an integer"))),
        Value::String(s) => Ok(parse_value_string(s)),
        Value::Sequence(items) => {
            let names = items
                .iter()
                .map(|item| match item {
                    Value::String(s) => Ok(s.clone()),
                    other => Err(GuideError::Schema(format!(
                        "account list entries must be strings, got {other:?}"
                    ))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PolicyValue::Principals(names))
        }
        Value::Mapping(mapping) => {
            let mut main = None;
            let mut sub = Vec::new();
            for (key, val) in mapping {
                let label = key
                    .as_str()
                    .ok_or_else(|| {
                        GuideError::Schema("composite value keys must be strings".to_string())
                    })?
                    .to_string();
                let parsed = policy_value_from_yaml(val)?;
                if label == MAIN_SETTING_KEY {
                    main = Some(parsed);
                } else {
                    sub.push((label, parsed));
                }
            }
            let main = main.ok_or_else(|| {
                GuideError::Schema(format!(
                    "composite value is missing the `{MAIN_SETTING_KEY}` key"
                ))
            })?;
            if !matches!(
                main,
                PolicyValue::Toggle(_) | PolicyValue::Choice(_) | PolicyValue::Text(_)
            ) {
                return Err(GuideError::Schema(format!(
                    "composite main setting must be a toggle or a choice, got {}",
                    main.kind_name()
                )));
            }
            if sub.iter().any(|(_, v)| matches!(v, PolicyValue::Composite { .. })) {
                return Err(GuideError::Schema(
                    "composite sub-settings cannot nest further composites".to_string(),
                ));
            }
            Ok(PolicyValue::Composite {
                main: Box::new(main),
                sub,
            })
        }
        other => Err(GuideError::Schema(format!(
            "unsupported policy value {other:?}"
        ))),
    }
}

fn parse_value_string(s: &str) -> PolicyValue {
    if s.eq_ignore_ascii_case("enabled") {
        return PolicyValue::Toggle(true);
    }
    if s.eq_ignore_ascii_case("disabled") {
        return PolicyValue::Toggle(false);
    }
    if let Some(audit) = AuditValue::from_display(s) {
        return PolicyValue::Audit(audit);
    }
    PolicyValue::Choice(s.to_string())
}
