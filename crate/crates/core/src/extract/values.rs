//! Interpretation of captured value phrases.
//!
//! The capture spans come back verbatim from the guide prose, quotes and
//! all; this module turns them into typed policy values. A phrase that fits
//! no form is an error carrying the raw text, so a rule is marked
//! not-extracted rather than silently mis-read.

use crate::guide::{AuditValue, PolicyValue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot interpret value text `{raw}`: {reason}")]
pub struct ValueParseError {
    pub raw: String,
    pub reason: String,
}

fn value_error(raw: &str, reason: impl Into<String>) -> ValueParseError {
    ValueParseError {
        raw: raw.to_string(),
        reason: reason.into(),
    }
}

/// Parse the captured value texts of one sentence.
///
/// `main` is the primary value phrase; `sub`/`option` come from
/// "with X selected for Y" forms; `trailing_list` holds bullet items that
/// followed the sentence.
pub fn parse_value_text(
    main: &str,
    sub: Option<&str>,
    option: Option<&str>,
    trailing_list: &[String],
) -> Result<PolicyValue, ValueParseError> {
    match (sub, option) {
        (Some(sub), Some(option)) => {
            let main_value = parse_simple(main)?;
            Ok(PolicyValue::Composite {
                main: Box::new(main_value),
                sub: vec![(
                    option.trim().to_string(),
                    PolicyValue::Choice(sub.trim().to_string()),
                )],
            })
        }
        (None, None) => {
            if is_include_only_phrase(main) {
                return Ok(PolicyValue::Principals(
                    trailing_list
                        .iter()
                        .map(|item| strip_quotes(item.trim()).to_string())
                        .collect(),
                ));
            }
            parse_simple(main)
        }
        _ => Err(value_error(
            main,
            "sub-value and option name must appear together",
        )),
    }
}

/// "to include only the following accounts or groups:" and close variants.
fn is_include_only_phrase(text: &str) -> bool {
    let lower = text.to_lowercase();
    lower.contains("include only the following")
        || lower.contains("accounts or groups")
}

fn parse_simple(text: &str) -> Result<PolicyValue, ValueParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(value_error(text, "empty value"));
    }
    let unquoted = strip_quotes(trimmed);
    if unquoted.eq_ignore_ascii_case("enabled") {
        return Ok(PolicyValue::Toggle(true));
    }
    if unquoted.eq_ignore_ascii_case("disabled") {
        return Ok(PolicyValue::Toggle(false));
    }
    // audit phrases may quote each word: "Success" and "Failure"
    if let Some(audit) = AuditValue::from_display(&trimmed.replace('"', "")) {
        return Ok(PolicyValue::Audit(audit));
    }
    // numeric boundary: a leading integer is the value to set, the rest of
    // the phrase ("or fewer invalid logon attempts ...") is prose
    let first_word = unquoted.split_whitespace().next().unwrap_or_default();
    if let Ok(n) = strip_quotes(first_word).parse::<i64>() {
        return Ok(PolicyValue::Number(n));
    }
    if unquoted.is_empty() {
        return Err(value_error(text, "empty value"));
    }
    Ok(PolicyValue::Choice(unquoted.to_string()))
}

fn strip_quotes(text: &str) -> &str {
    let text = text.trim();
    let text = text.strip_prefix('"').unwrap_or(text);
    text.strip_suffix('"').unwrap_or(text).trim()
}
