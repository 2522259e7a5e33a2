//! Extraction of policy automations from guide prose.
//!
//! The stage is a small pipeline of its own: tokenize the first
//! implementation description of each rule, tag the tokens, run the
//! extraction grammar over the tag sequence, then interpret the captured
//! path and value phrases. Rules the grammar cannot read are marked, never
//! guessed.

pub mod pattern;
pub mod tagger;
pub mod tokenizer;
mod values;

pub use pattern::{
    default_ruleset, load_ruleset, CaptureRole, ExtractionRuleDef, PatternError, PatternMatch,
};
pub use tagger::{tag, Lexicon, LexiconError, PosTag, Token, DEFAULT_LEXICON};
pub use tokenizer::{tokenize, tokenize_spans, RawToken};
pub use values::{parse_value_text, ValueParseError};

use crate::guide::{Automation, ExtractionStatus, Guide, WinGpoAutomation};
use crate::paths::{PathError, PolicyPath};
use std::collections::BTreeMap;

/// Normalize a captured path phrase (`>>` or backslash separated) into a
/// policy path, applying the same rules as catalog import.
pub fn normalize_path(path_text: &str) -> Result<PolicyPath, PathError> {
    PolicyPath::parse(path_text)
}

/// What the grammar pulled out of one sentence, as verbatim source spans.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub matched_rule: String,
    pub path_text: String,
    pub main_value_text: String,
    pub sub_value_text: Option<String>,
    pub option_name_text: Option<String>,
    pub trailing_list: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguousCandidate {
    pub rule: String,
    pub path_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatchOutcome {
    Match(ExtractionResult),
    NoMatch,
    /// Rules of equal priority matched with different path spans.
    Ambiguous(Vec<AmbiguousCandidate>),
}

/// Run the grammar over a tagged sentence. Rules are tried in priority
/// order; the first priority level with any match decides. Within a level,
/// matches must agree on the path span, otherwise the sentence is ambiguous.
pub fn match_patterns(
    source: &str,
    tagged: &[Token],
    rules: &[ExtractionRuleDef],
) -> MatchOutcome {
    let mut by_priority: BTreeMap<i32, Vec<&ExtractionRuleDef>> = BTreeMap::new();
    for rule in rules {
        by_priority.entry(rule.priority).or_default().push(rule);
    }

    for shelf in by_priority.values() {
        let mut matches: Vec<(&ExtractionRuleDef, PatternMatch)> = Vec::new();
        for rule in shelf {
            if let Some(found) = pattern::match_rule(rule, tagged) {
                matches.push((rule, found));
            }
        }
        if matches.is_empty() {
            continue;
        }
        let mut spans: Vec<(usize, usize)> = matches.iter().map(|(_, m)| m.path).collect();
        spans.sort_unstable();
        spans.dedup();
        if spans.len() > 1 {
            return MatchOutcome::Ambiguous(
                matches
                    .into_iter()
                    .map(|(rule, m)| AmbiguousCandidate {
                        rule: rule.name.clone(),
                        path_text: slice_span(source, tagged, m.path),
                    })
                    .collect(),
            );
        }
        let (_, matched) = &matches[0];
        return MatchOutcome::Match(ExtractionResult {
            matched_rule: matched.rule_name.clone(),
            path_text: slice_span(source, tagged, matched.path),
            main_value_text: matched
                .main_value
                .map(|r| slice_span(source, tagged, r))
                .unwrap_or_default(),
            sub_value_text: matched.sub_value.map(|r| slice_span(source, tagged, r)),
            option_name_text: matched.option_name.map(|r| slice_span(source, tagged, r)),
            trailing_list: Vec::new(),
        });
    }
    MatchOutcome::NoMatch
}

fn slice_span(source: &str, tagged: &[Token], range: (usize, usize)) -> String {
    source[tagged[range.0].start..tagged[range.1 - 1].end].to_string()
}

/// Split trailing bullet items ("- Administrators") off a description.
pub fn split_trailing_list(description: &str) -> (String, Vec<String>) {
    let lines: Vec<&str> = description.lines().collect();
    let mut cut = lines.len();
    let mut bullets_reversed = Vec::new();
    for line in lines.iter().rev() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            cut -= 1;
            continue;
        }
        if let Some(item) = trimmed.strip_prefix("- ").or_else(|| trimmed.strip_prefix("* ")) {
            bullets_reversed.push(item.trim().to_string());
            cut -= 1;
        } else {
            break;
        }
    }
    bullets_reversed.reverse();
    (lines[..cut].join("\n").trim_end().to_string(), bullets_reversed)
}

/// Per-rule verdicts of an extraction run.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ExtractReport {
    pub extracted: usize,
    pub not_extracted: usize,
    pub ambiguous: usize,
    pub manually_authored: usize,
    pub skipped: usize,
}

/// Extract a policy automation for every rule that does not already carry
/// one. Each rule gains at most one automation, always unchecked; failures
/// mark the rule and move on.
pub fn extract_guide(
    guide: &mut Guide,
    rules: &[ExtractionRuleDef],
    lexicon: &Lexicon,
) -> ExtractReport {
    let mut report = ExtractReport::default();
    for rule in &mut guide.rules {
        if rule.has_automation() {
            // hand-written or previously extracted automations stay put
            if rule.extraction_status == ExtractionStatus::NotAttempted {
                rule.extraction_status = ExtractionStatus::ManuallyAuthored;
                report.manually_authored += 1;
            } else {
                report.skipped += 1;
            }
            continue;
        }
        match extract_rule(rule, rules, lexicon) {
            Extracted::Automation(automation) => {
                rule.extraction_status = ExtractionStatus::Extracted;
                rule.extraction_note = None;
                if rule.implementations.is_empty() {
                    rule.implementations.push(Default::default());
                }
                rule.implementations[0]
                    .automations
                    .push(Automation::WinGpo(automation));
                report.extracted += 1;
            }
            Extracted::None(note) => {
                rule.extraction_status = ExtractionStatus::NotExtracted;
                rule.extraction_note = note;
                report.not_extracted += 1;
            }
            Extracted::Ambiguous(candidates) => {
                rule.extraction_status = ExtractionStatus::Ambiguous;
                let listing = candidates
                    .iter()
                    .map(|c| format!("{} -> `{}`", c.rule, c.path_text))
                    .collect::<Vec<_>>()
                    .join("; ");
                rule.extraction_note = Some(format!(
                    "ambiguous: {} equal-priority matches disagree on the path: {listing}",
                    candidates.len()
                ));
                report.ambiguous += 1;
            }
        }
    }
    report
}

enum Extracted {
    Automation(WinGpoAutomation),
    None(Option<String>),
    Ambiguous(Vec<AmbiguousCandidate>),
}

fn extract_rule(
    rule: &crate::guide::Rule,
    ruleset: &[ExtractionRuleDef],
    lexicon: &Lexicon,
) -> Extracted {
    let description = match rule.implementations.first() {
        Some(implementation) if !implementation.description.trim().is_empty() => {
            implementation.description.clone()
        }
        _ => return Extracted::None(Some("no implementation description".to_string())),
    };
    let (prose, trailing) = split_trailing_list(&description);
    let tokens = tokenize_spans(&prose);
    let tagged = tag(&tokens, lexicon);
    match match_patterns(&prose, &tagged, ruleset) {
        MatchOutcome::NoMatch => Extracted::None(None),
        MatchOutcome::Ambiguous(candidates) => Extracted::Ambiguous(candidates),
        MatchOutcome::Match(mut result) => {
            result.trailing_list = trailing;
            let path = match normalize_path(&result.path_text) {
                Ok(path) => path,
                Err(e) => {
                    return Extracted::None(Some(format!(
                        "matched `{}` but the path does not normalize: {e}",
                        result.matched_rule
                    )))
                }
            };
            let value = match parse_value_text(
                &result.main_value_text,
                result.sub_value_text.as_deref(),
                result.option_name_text.as_deref(),
                &result.trailing_list,
            ) {
                Ok(value) => value,
                Err(e) => {
                    return Extracted::None(Some(format!(
                        "matched `{}` but the value is unreadable: {e}",
                        result.matched_rule
                    )))
                }
            };
            Extracted::Automation(WinGpoAutomation::new(path, value))
        }
    }
}
