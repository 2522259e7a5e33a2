//! Tag-sequence extraction rules and their matcher.
//!
//! A rule's pattern is written in angle-bracket syntax, one step per
//! bracket, with capture groups marking the spans to pull out:
//!
//! ```text
//! <IN> {PATH:<.*>+} <TO> {MAIN_VALUE:<VBN|VBD|VB>} <IN> {SUB_VALUE:<.*>+} <VBN|VBD> <IN> {OPTION_NAME:<NN|NNP>+} <.>
//! ```
//!
//! `<X|Y>` matches one token tagged X or Y, `<.*>` matches any token, and a
//! trailing `+` allows repetition. Matching is leftmost, with greedy
//! quantifiers that backtrack, so the match starting earliest wins and
//! within it each quantified step takes the longest span that lets the rest
//! of the pattern succeed.

use super::tagger::{PosTag, Token};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaptureRole {
    Path,
    MainValue,
    SubValue,
    OptionName,
}

impl CaptureRole {
    fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "PATH" => CaptureRole::Path,
            "MAIN_VALUE" => CaptureRole::MainValue,
            "SUB_VALUE" => CaptureRole::SubValue,
            "OPTION_NAME" => CaptureRole::OptionName,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TagMatcher {
    Any,
    OneOf(Vec<PosTag>),
}

impl TagMatcher {
    fn matches(&self, tag: PosTag) -> bool {
        match self {
            TagMatcher::Any => true,
            TagMatcher::OneOf(tags) => tags.contains(&tag),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    One,
    OneOrMore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternStep {
    pub matcher: TagMatcher,
    pub quantifier: Quantifier,
    pub capture: Option<CaptureRole>,
}

/// One extraction rule: a named, prioritized tag pattern.
#[derive(Debug, Clone)]
pub struct ExtractionRuleDef {
    pub name: String,
    /// Lower numbers are tried first.
    pub priority: i32,
    pub pattern: Vec<PatternStep>,
}

#[derive(Debug, thiserror::Error)]
pub enum PatternError {
    #[error("ruleset parse error: {0}")]
    Parse(#[from] serde_yaml::Error),
    #[error("rule `{rule}`: {message}")]
    Syntax { rule: String, message: String },
    #[error("rule `{0}`: no step captures PATH")]
    MissingPathCapture(String),
    #[error("rule `{rule}`: capture {role:?} appears in two disjoint runs")]
    SplitCapture { rule: String, role: CaptureRole },
}

#[derive(Debug, Deserialize)]
struct RuleFile {
    name: String,
    priority: i32,
    pattern: String,
}

pub const DEFAULT_RULESET: &str = include_str!("../../defaults/extraction_rules.yaml");

/// Load a ruleset document and return the rules sorted by priority
/// (stable, so file order breaks ties).
pub fn load_ruleset(text: &str) -> Result<Vec<ExtractionRuleDef>, PatternError> {
    let files: Vec<RuleFile> = serde_yaml::from_str(text)?;
    let mut rules = files
        .into_iter()
        .map(|file| {
            let pattern = parse_pattern(&file.pattern, &file.name)?;
            Ok(ExtractionRuleDef {
                name: file.name,
                priority: file.priority,
                pattern,
            })
        })
        .collect::<Result<Vec<_>, PatternError>>()?;
    rules.sort_by_key(|r| r.priority);
    Ok(rules)
}

pub fn default_ruleset() -> Vec<ExtractionRuleDef> {
    load_ruleset(DEFAULT_RULESET).expect("bundled ruleset parses")
}

pub fn parse_pattern(text: &str, rule: &str) -> Result<Vec<PatternStep>, PatternError> {
    let syntax = |message: String| PatternError::Syntax {
        rule: rule.to_string(),
        message,
    };
    let mut steps = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix('{') {
            let colon = after
                .find(':')
                .ok_or_else(|| syntax("capture group without a role".to_string()))?;
            let role = CaptureRole::parse(after[..colon].trim())
                .ok_or_else(|| syntax(format!("unknown capture role `{}`", &after[..colon])))?;
            let close = after
                .find('}')
                .ok_or_else(|| syntax("unterminated capture group".to_string()))?;
            if close < colon {
                return Err(syntax("capture group without a role".to_string()));
            }
            let inner = parse_steps(&after[colon + 1..close], rule)?;
            if inner.is_empty() {
                return Err(syntax("empty capture group".to_string()));
            }
            steps.extend(inner.into_iter().map(|mut step| {
                step.capture = Some(role);
                step
            }));
            rest = after[close + 1..].trim_start();
        } else if rest.starts_with('<') {
            let close = rest
                .find('>')
                .ok_or_else(|| syntax("unterminated step".to_string()))?;
            let mut end = close + 1;
            let mut quantifier = Quantifier::One;
            if rest[end..].starts_with('+') {
                quantifier = Quantifier::OneOrMore;
                end += 1;
            }
            steps.push(PatternStep {
                matcher: parse_matcher(&rest[1..close], rule)?,
                quantifier,
                capture: None,
            });
            rest = rest[end..].trim_start();
        } else {
            return Err(syntax(format!("unexpected input at `{rest}`")));
        }
    }
    validate_pattern(&steps, rule)?;
    Ok(steps)
}

fn parse_steps(text: &str, rule: &str) -> Result<Vec<PatternStep>, PatternError> {
    let mut steps = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if !rest.starts_with('<') {
            return Err(PatternError::Syntax {
                rule: rule.to_string(),
                message: format!("expected `<` inside capture group, found `{rest}`"),
            });
        }
        let close = rest.find('>').ok_or_else(|| PatternError::Syntax {
            rule: rule.to_string(),
            message: "unterminated step".to_string(),
        })?;
        let mut end = close + 1;
        let mut quantifier = Quantifier::One;
        if rest[end..].starts_with('+') {
            quantifier = Quantifier::OneOrMore;
            end += 1;
        }
        steps.push(PatternStep {
            matcher: parse_matcher(&rest[1..close], rule)?,
            quantifier,
            capture: None,
        });
        rest = rest[end..].trim_start();
    }
    Ok(steps)
}

fn parse_matcher(text: &str, rule: &str) -> Result<TagMatcher, PatternError> {
    let text = text.trim();
    if text == ".*" {
        return Ok(TagMatcher::Any);
    }
    let tags = text
        .split('|')
        .map(|part| {
            PosTag::parse(part.trim()).ok_or_else(|| PatternError::Syntax {
                rule: rule.to_string(),
                message: format!("unknown tag `{part}`"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TagMatcher::OneOf(tags))
}

fn validate_pattern(steps: &[PatternStep], rule: &str) -> Result<(), PatternError> {
    if !steps.iter().any(|s| s.capture == Some(CaptureRole::Path)) {
        return Err(PatternError::MissingPathCapture(rule.to_string()));
    }
    // captures must be contiguous runs
    for role in [
        CaptureRole::Path,
        CaptureRole::MainValue,
        CaptureRole::SubValue,
        CaptureRole::OptionName,
    ] {
        let mut runs = 0;
        let mut inside = false;
        for step in steps {
            let here = step.capture == Some(role);
            if here && !inside {
                runs += 1;
            }
            inside = here;
        }
        if runs > 1 {
            return Err(PatternError::SplitCapture {
                rule: rule.to_string(),
                role,
            });
        }
    }
    Ok(())
}

/// A successful match: the captured token ranges, sliced later against the
/// source text.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMatch {
    pub rule_name: String,
    /// Token index ranges per capture role, inclusive start, exclusive end.
    pub path: (usize, usize),
    pub main_value: Option<(usize, usize)>,
    pub sub_value: Option<(usize, usize)>,
    pub option_name: Option<(usize, usize)>,
}

/// Leftmost match of one rule against the token stream, or None.
pub fn match_rule(rule: &ExtractionRuleDef, tokens: &[Token]) -> Option<PatternMatch> {
    for start in 0..tokens.len() {
        let mut consumed = vec![0usize; rule.pattern.len()];
        if try_match(&rule.pattern, tokens, start, 0, &mut consumed) {
            return Some(build_match(rule, start, &consumed));
        }
    }
    None
}

/// Greedy descent with backtracking: quantified steps take as many tokens as
/// possible, then give tokens back until the remaining steps fit.
fn try_match(
    steps: &[PatternStep],
    tokens: &[Token],
    pos: usize,
    step_index: usize,
    consumed: &mut Vec<usize>,
) -> bool {
    let Some(step) = steps.get(step_index) else {
        return true;
    };
    let max = match step.quantifier {
        Quantifier::One => {
            usize::from(pos < tokens.len() && step.matcher.matches(tokens[pos].tag))
        }
        Quantifier::OneOrMore => {
            let mut n = 0;
            while pos + n < tokens.len() && step.matcher.matches(tokens[pos + n].tag) {
                n += 1;
            }
            n
        }
    };
    if max == 0 {
        return false;
    }
    for take in (1..=max).rev() {
        consumed[step_index] = take;
        if try_match(steps, tokens, pos + take, step_index + 1, consumed) {
            return true;
        }
    }
    false
}

fn build_match(rule: &ExtractionRuleDef, start: usize, consumed: &[usize]) -> PatternMatch {
    let mut ranges: [Option<(usize, usize)>; 4] = [None; 4];
    let mut pos = start;
    for (step, taken) in rule.pattern.iter().zip(consumed) {
        if let Some(role) = step.capture {
            let slot = &mut ranges[role_index(role)];
            match slot {
                Some((_, end)) => *end = pos + taken,
                None => *slot = Some((pos, pos + taken)),
            }
        }
        pos += taken;
    }
    PatternMatch {
        rule_name: rule.name.clone(),
        path: ranges[0].expect("validated pattern always captures PATH"),
        main_value: ranges[1],
        sub_value: ranges[2],
        option_name: ranges[3],
    }
}

fn role_index(role: CaptureRole) -> usize {
    match role {
        CaptureRole::Path => 0,
        CaptureRole::MainValue => 1,
        CaptureRole::SubValue => 2,
        CaptureRole::OptionName => 3,
    }
}
