//! Verification of extracted automations against the settings catalog.
//!
//! Three questions per automation: does the policy path exist, does the
//! value have the right shape, and is it admissible for that setting. A
//! failure never aborts the run; the automation is enriched with an error
//! class, a hint, and ranked candidates so a reviewer can fix the guide and
//! re-run.

use crate::catalog::{
    normalize_display, AccessModel, AuditDef, Definition, ElementKind, PrivilegeDef,
    RegistryValueInfDef, SettingCatalog, SettingDefinition, SystemAccessDef,
};
use crate::guide::{
    AuditValue, Candidates, Guide, PolicyValue, VerificationStatus, WinGpoAutomation,
};
use crate::paths::PolicyPath;

/// Classification of one verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyStatus {
    Checked,
    PathNotFound,
    ValueInvalid,
    Underspecified,
}

/// Everything attached to a failed verification.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationOutcome {
    pub status: VerifyStatus,
    pub error_class: Option<String>,
    pub error_hint: Option<String>,
    pub candidates: Option<Candidates>,
}

impl VerificationOutcome {
    fn checked() -> Self {
        VerificationOutcome {
            status: VerifyStatus::Checked,
            error_class: None,
            error_hint: None,
            candidates: None,
        }
    }
}

pub const VALUE_HINT: &str = "To apply this rule, please choose a setting value for each sub-setting in candidates. Next, replace the content of the 'value' attribute with the content of candidates.";

/// Unit-cost edit distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_slices(&a, &b)
}

/// Unit-cost edit distance over any comparable sequence (used per-word).
pub fn levenshtein_slices<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0usize; b.len() + 1];
    for (i, item_a) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, item_b) in b.iter().enumerate() {
            let substitution = usize::from(item_a != item_b);
            current[j + 1] = (prev[j + 1] + 1)
                .min(current[j] + 1)
                .min(prev[j] + substitution);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}

/// Candidate paths for a query that missed the catalog, best first.
///
/// Each candidate is scored with the smaller of the character distance over
/// the full normalized path and the segment-wise distance scaled by the
/// query's mean segment length; only candidates scoring within 0.6 of the
/// query length are kept. Ties break lexicographically.
pub fn suggest_paths(catalog: &SettingCatalog, path: &PolicyPath, k: usize) -> Vec<String> {
    assert!(k >= 1, "suggestion count must be at least 1");
    let query_key = path.key();
    let query_segments: Vec<String> = path
        .full_segments()
        .iter()
        .map(|s| s.to_lowercase())
        .collect();
    let mean_segment_len = query_segments.iter().map(|s| s.len()).sum::<usize>() as f64
        / query_segments.len().max(1) as f64;
    let threshold = 0.6 * query_key.chars().count() as f64;

    let mut scored: Vec<(f64, String)> = Vec::new();
    for def in catalog.definitions() {
        let candidate = def.ui_path();
        let candidate_key = candidate.key();
        let candidate_segments: Vec<String> = candidate
            .full_segments()
            .iter()
            .map(|s| s.to_lowercase())
            .collect();
        let char_distance = levenshtein(&query_key, &candidate_key) as f64;
        let word_distance = levenshtein_slices(&query_segments, &candidate_segments) as f64;
        let score = char_distance.min(word_distance * mean_segment_len);
        if score <= threshold {
            scored.push((score, candidate.display()));
        }
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, display)| display).collect()
}

fn displays_match(a: &str, b: &str, strict: bool) -> bool {
    if strict {
        a == b
    } else {
        normalize_display(a) == normalize_display(b)
    }
}

fn value_invalid(hint: &str, candidates: Option<Candidates>) -> VerificationOutcome {
    VerificationOutcome {
        status: VerifyStatus::ValueInvalid,
        error_class: Some("CONFIGURE".to_string()),
        error_hint: Some(hint.to_string()),
        candidates,
    }
}

fn underspecified(candidates: Candidates) -> VerificationOutcome {
    VerificationOutcome {
        status: VerifyStatus::Underspecified,
        error_class: Some("CONFIGURE".to_string()),
        error_hint: Some(VALUE_HINT.to_string()),
        candidates: Some(candidates),
    }
}

/// Check a value against the catalog definition for its path.
pub fn validate_value(
    def: &Definition,
    value: &PolicyValue,
    strict: bool,
) -> VerificationOutcome {
    match def {
        Definition::Admx(setting) => validate_admx(setting, value, strict, true),
        Definition::Privilege(privilege) => validate_privilege(privilege, value),
        Definition::SystemAccess(access) => validate_system_access(access, value, strict),
        Definition::RegistryValueInf(inf) => validate_registry_inf(inf, value, strict),
        Definition::Audit(audit) => validate_audit(audit, value),
    }
}

/// Per-element candidate map in the shape reviewers see: the main setting
/// first, then one entry per sub-setting.
fn element_candidates(setting: &SettingDefinition) -> Candidates {
    let mut entries = Vec::new();
    let mut main_options = Vec::new();
    if setting.disabled_data.is_some() {
        main_options.push("Disabled".to_string());
    }
    if setting.enabled_data.is_some() {
        main_options.push("Enabled".to_string());
    }
    if !main_options.is_empty() {
        entries.push(("main_setting".to_string(), main_options));
    }
    for element in &setting.elements {
        let options = match &element.kind {
            ElementKind::Enum { items } => items.keys().cloned().collect(),
            ElementKind::Decimal { min, max } => vec![format!("{min}..{max}")],
            ElementKind::Text { max_length } => vec![format!("<text, up to {max_length} chars>")],
            ElementKind::Boolean { .. } => vec!["Disabled".to_string(), "Enabled".to_string()],
            ElementKind::List { .. } => vec!["<list of entries>".to_string()],
        };
        entries.push((element.label.clone(), options));
    }
    Candidates::PerElement(entries)
}

fn enum_displays(setting: &SettingDefinition) -> Vec<String> {
    setting
        .elements
        .iter()
        .filter_map(|e| match &e.kind {
            ElementKind::Enum { items } => Some(items.keys().cloned()),
            _ => None,
        })
        .flatten()
        .collect()
}

fn validate_admx(
    setting: &SettingDefinition,
    value: &PolicyValue,
    strict: bool,
    require_elements: bool,
) -> VerificationOutcome {
    match value {
        PolicyValue::Toggle(enabled) => {
            let data = if *enabled {
                &setting.enabled_data
            } else {
                &setting.disabled_data
            };
            if data.is_none() {
                return value_invalid(
                    VALUE_HINT,
                    Some(element_candidates(setting)),
                );
            }
            if *enabled && require_elements && (!setting.elements.is_empty() || !setting.automatable)
            {
                // enabling alone leaves required sub-settings unconfigured
                return underspecified(element_candidates(setting));
            }
            VerificationOutcome::checked()
        }
        PolicyValue::Number(n) => {
            let decimal = setting
                .elements
                .iter()
                .find_map(|e| match e.kind {
                    ElementKind::Decimal { min, max } => Some((min, max)),
                    _ => None,
                });
            match decimal {
                Some((min, max)) if (min..=max).contains(n) => VerificationOutcome::checked(),
                Some((min, max)) => value_invalid(
                    &format!("value {n} is outside the allowed range {min}..{max}"),
                    Some(Candidates::List(vec![format!("{min}..{max}")])),
                ),
                None => value_invalid(
                    "this setting takes no numeric value",
                    Some(element_candidates(setting)),
                ),
            }
        }
        PolicyValue::Choice(display) | PolicyValue::Text(display) => {
            let admissible = enum_displays(setting);
            if admissible.iter().any(|d| displays_match(d, display, strict)) {
                return VerificationOutcome::checked();
            }
            if !admissible.is_empty() {
                return value_invalid(VALUE_HINT, Some(Candidates::List(admissible)));
            }
            // free-text settings accept any string within the length bound
            if let Some(max_length) = setting.elements.iter().find_map(|e| match e.kind {
                ElementKind::Text { max_length } => Some(max_length),
                _ => None,
            }) {
                if display.chars().count() <= max_length as usize {
                    return VerificationOutcome::checked();
                }
                return value_invalid(
                    &format!("text exceeds the {max_length} character limit"),
                    None,
                );
            }
            value_invalid(VALUE_HINT, Some(element_candidates(setting)))
        }
        PolicyValue::Audit(v) => {
            validate_admx(setting, &PolicyValue::Choice(v.display().to_string()), strict, require_elements)
        }
        PolicyValue::Principals(_) => value_invalid(
            "template-backed settings do not take account lists",
            Some(element_candidates(setting)),
        ),
        PolicyValue::Composite { main, sub } => {
            let main_outcome = validate_admx(setting, main, strict, false);
            if main_outcome.status != VerifyStatus::Checked {
                return main_outcome;
            }
            let mut covered = vec![false; setting.elements.len()];
            for (label, sub_value) in sub {
                let position = setting
                    .elements
                    .iter()
                    .position(|e| displays_match(&e.label, label, strict));
                let Some(position) = position else {
                    return value_invalid(
                        &format!("`{label}` names no sub-setting of this policy"),
                        Some(element_candidates(setting)),
                    );
                };
                covered[position] = true;
                let element = &setting.elements[position];
                if let Some(outcome) = validate_element(setting, element, sub_value, strict) {
                    return outcome;
                }
            }
            let enabling = matches!(main.as_ref(), PolicyValue::Toggle(true));
            if enabling && (covered.iter().any(|c| !c) || !setting.automatable) {
                return underspecified(element_candidates(setting));
            }
            VerificationOutcome::checked()
        }
    }
}

fn validate_element(
    setting: &SettingDefinition,
    element: &crate::catalog::SettingElement,
    value: &PolicyValue,
    strict: bool,
) -> Option<VerificationOutcome> {
    let fail = |hint: String, candidates: Option<Candidates>| {
        Some(value_invalid(&hint, candidates))
    };
    match (&element.kind, value) {
        (ElementKind::Enum { items }, value) => {
            let display = match value {
                PolicyValue::Choice(s) | PolicyValue::Text(s) => s.clone(),
                PolicyValue::Toggle(true) => "Enabled".to_string(),
                PolicyValue::Toggle(false) => "Disabled".to_string(),
                PolicyValue::Audit(v) => v.display().to_string(),
                PolicyValue::Number(n) => n.to_string(),
                _ => {
                    return fail(
                        format!("`{}` takes one of its listed options", element.label),
                        Some(Candidates::List(items.keys().cloned().collect())),
                    )
                }
            };
            if items.keys().any(|d| displays_match(d, &display, strict)) {
                None
            } else {
                fail(
                    VALUE_HINT.to_string(),
                    Some(Candidates::List(items.keys().cloned().collect())),
                )
            }
        }
        (ElementKind::Decimal { min, max }, PolicyValue::Number(n)) => {
            if (min..=max).contains(&n) {
                None
            } else {
                fail(
                    format!(
                        "`{}` must be between {min} and {max}",
                        element.label
                    ),
                    Some(Candidates::List(vec![format!("{min}..{max}")])),
                )
            }
        }
        (ElementKind::Text { max_length }, PolicyValue::Choice(s) | PolicyValue::Text(s)) => {
            if s.chars().count() <= *max_length as usize {
                None
            } else {
                fail(
                    format!("`{}` exceeds {max_length} characters", element.label),
                    None,
                )
            }
        }
        (ElementKind::Boolean { .. }, PolicyValue::Toggle(_)) => None,
        (ElementKind::List { .. }, PolicyValue::Principals(_)) => None,
        _ => fail(
            format!(
                "`{}` does not accept a {} value",
                element.label,
                value.kind_name()
            ),
            Some(element_candidates(setting)),
        ),
    }
}

fn validate_privilege(_privilege: &PrivilegeDef, value: &PolicyValue) -> VerificationOutcome {
    match value {
        PolicyValue::Principals(_) => VerificationOutcome::checked(),
        _ => value_invalid(
            "user rights assignments take a list of accounts or groups",
            None,
        ),
    }
}

fn validate_system_access(
    access: &SystemAccessDef,
    value: &PolicyValue,
    strict: bool,
) -> VerificationOutcome {
    match &access.model {
        AccessModel::Integer { min, max } => match value {
            PolicyValue::Number(n) if (min..=max).contains(&n) => VerificationOutcome::checked(),
            PolicyValue::Number(n) => value_invalid(
                &format!("value {n} is outside the allowed range {min}..{max}"),
                Some(Candidates::List(vec![format!("{min}..{max}")])),
            ),
            _ => value_invalid(
                &format!("this setting takes a number between {min} and {max}"),
                Some(Candidates::List(vec![format!("{min}..{max}")])),
            ),
        },
        AccessModel::Enum { options } =>

            match display_of(value) {
                Some(display)
                    if options.keys().any(|d| displays_match(d, &display, strict)) =>
                {
                    VerificationOutcome::checked()
                }
                _ => value_invalid(
                    VALUE_HINT,
                    Some(Candidates::List(options.keys().cloned().collect())),
                ),
            },
    }
}

fn validate_registry_inf(
    inf: &RegistryValueInfDef,
    value: &PolicyValue,
    strict: bool,
) -> VerificationOutcome {
    match display_of(value) {
        Some(display) if inf.options.keys().any(|d| displays_match(d, &display, strict)) => {
            VerificationOutcome::checked()
        }
        _ => value_invalid(
            VALUE_HINT,
            Some(Candidates::List(inf.options.keys().cloned().collect())),
        ),
    }
}

fn validate_audit(_audit: &AuditDef, value: &PolicyValue) -> VerificationOutcome {
    let all = || {
        Candidates::List(vec![
            AuditValue::NoAuditing.display().to_string(),
            AuditValue::Success.display().to_string(),
            AuditValue::Failure.display().to_string(),
            AuditValue::SuccessAndFailure.display().to_string(),
        ])
    };
    match value {
        PolicyValue::Audit(_) => VerificationOutcome::checked(),
        PolicyValue::Choice(s) if AuditValue::from_display(s).is_some() => {
            VerificationOutcome::checked()
        }
        _ => value_invalid(VALUE_HINT, Some(all())),
    }
}

fn display_of(value: &PolicyValue) -> Option<String> {
    match value {
        PolicyValue::Choice(s) | PolicyValue::Text(s) => Some(s.clone()),
        PolicyValue::Toggle(true) => Some("Enabled".to_string()),
        PolicyValue::Toggle(false) => Some("Disabled".to_string()),
        PolicyValue::Audit(v) => Some(v.display().to_string()),
        _ => None,
    }
}

/// Knobs for a verification run.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Exact display-string matching instead of the lenient default.
    pub strict: bool,
    /// How many path suggestions to attach on a miss.
    pub suggestions: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            strict: false,
            suggestions: 3,
        }
    }
}

/// Counts per verification status over one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub checked: usize,
    pub path_not_found: usize,
    pub value_invalid: usize,
    pub underspecified: usize,
}

impl VerificationReport {
    pub fn total(&self) -> usize {
        self.checked + self.path_not_found + self.value_invalid + self.underspecified
    }

    pub fn all_checked(&self) -> bool {
        self.total() == self.checked
    }
}

/// Verify every unchecked automation in the guide. Checked automations are
/// left alone, so re-running over a fully verified guide is a no-op.
pub fn verify_guide(
    catalog: &SettingCatalog,
    guide: &mut Guide,
    options: VerifyOptions,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    for rule in &mut guide.rules {
        for implementation in &mut rule.implementations {
            for automation in &mut implementation.automations {
                if let crate::guide::Automation::WinGpo(gpo) = automation {
                    verify_automation(catalog, gpo, options, &mut report);
                }
            }
        }
    }
    report
}

fn verify_automation(
    catalog: &SettingCatalog,
    automation: &mut WinGpoAutomation,
    options: VerifyOptions,
    report: &mut VerificationReport,
) {
    if automation.verification_status == VerificationStatus::Checked {
        report.checked += 1;
        return;
    }
    let outcome = match catalog.lookup(&automation.ui_path) {
        None => {
            let candidates = suggest_paths(catalog, &automation.ui_path, options.suggestions);
            let leaf = automation
                .ui_path
                .leaf()
                .to_lowercase()
                .replace(char::is_whitespace, "");
            let hint = if candidates.is_empty() {
                "The given path was not found and there are no similar policies.".to_string()
            } else {
                format!(
                    "The given path was not found, but there were {} similar policies. If the UI path you were looking for is in the array, please replace the original UI path with the new UI path.",
                    candidates.len()
                )
            };
            VerificationOutcome {
                status: VerifyStatus::PathNotFound,
                error_class: Some(format!("NOT_FOUND policy name \"{leaf}\"")),
                error_hint: Some(hint),
                candidates: if candidates.is_empty() {
                    None
                } else {
                    Some(Candidates::List(candidates))
                },
            }
        }
        Some(def) => validate_value(def, &automation.value, options.strict),
    };

    match outcome.status {
        VerifyStatus::Checked => {
            automation.verification_status = VerificationStatus::Checked;
            automation.error_class = None;
            automation.error_hint = None;
            automation.candidates = None;
            report.checked += 1;
        }
        status => {
            automation.verification_status = VerificationStatus::Unchecked;
            automation.error_class = outcome.error_class;
            automation.error_hint = outcome.error_hint;
            automation.candidates = outcome.candidates;
            match status {
                VerifyStatus::PathNotFound => report.path_not_found += 1,
                VerifyStatus::ValueInvalid => report.value_invalid += 1,
                VerifyStatus::Underspecified => report.underspecified += 1,
                VerifyStatus::Checked => unreachable!(),
            }
        }
    }
}
