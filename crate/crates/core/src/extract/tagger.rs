//! Deterministic lexicon-plus-suffix part-of-speech tagger.
//!
//! Guide prose is schematic enough that a closed-class lexicon, a handful of
//! context rules, and three suffix rules reproduce the tags the extraction
//! grammar needs. Determinism keeps fixtures stable; the tagger is an
//! ordinary value, so a different one can be loaded from a lexicon file.

use super::tokenizer::RawToken;
use serde::Deserialize;
use std::collections::HashMap;
use std::fmt;

/// The closed tag set the extraction grammar is written against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    In,
    To,
    Dt,
    Cc,
    Cd,
    Vb,
    Vbd,
    Vbn,
    Nn,
    Nnp,
    Nns,
    Jj,
    Period,
    Open,
    Close,
    Colon,
    Sym,
}

impl PosTag {
    pub fn name(self) -> &'static str {
        match self {
            PosTag::In => "IN",
            PosTag::To => "TO",
            PosTag::Dt => "DT",
            PosTag::Cc => "CC",
            PosTag::Cd => "CD",
            PosTag::Vb => "VB",
            PosTag::Vbd => "VBD",
            PosTag::Vbn => "VBN",
            PosTag::Nn => "NN",
            PosTag::Nnp => "NNP",
            PosTag::Nns => "NNS",
            PosTag::Jj => "JJ",
            PosTag::Period => ".",
            PosTag::Open => "(",
            PosTag::Close => ")",
            PosTag::Colon => ":",
            PosTag::Sym => "SYM",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "IN" => PosTag::In,
            "TO" => PosTag::To,
            "DT" => PosTag::Dt,
            "CC" => PosTag::Cc,
            "CD" => PosTag::Cd,
            "VB" => PosTag::Vb,
            "VBD" => PosTag::Vbd,
            "VBN" => PosTag::Vbn,
            "NN" => PosTag::Nn,
            "NNP" => PosTag::Nnp,
            "NNS" => PosTag::Nns,
            "JJ" => PosTag::Jj,
            "." => PosTag::Period,
            "(" => PosTag::Open,
            ")" => PosTag::Close,
            ":" => PosTag::Colon,
            "SYM" => PosTag::Sym,
            _ => return None,
        })
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A tagged token, spans preserved from tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub tag: PosTag,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Deserialize)]
struct LexiconFile {
    #[serde(default)]
    words: HashMap<String, String>,
    #[serde(default)]
    sentence_start_verbs: Vec<String>,
    #[serde(default)]
    suffix_rules: Vec<SuffixRuleFile>,
}

#[derive(Debug, Deserialize)]
struct SuffixRuleFile {
    suffix: String,
    tag: String,
}

/// Word lists driving the tagger.
#[derive(Debug, Clone)]
pub struct Lexicon {
    words: HashMap<String, PosTag>,
    sentence_start_verbs: Vec<String>,
    suffix_rules: Vec<(String, PosTag)>,
}

pub const DEFAULT_LEXICON: &str = include_str!("../../defaults/lexicon.yaml");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon parse error: {0}")]
    Parse(#[from] serde_yaml::Error),
    #[error("lexicon maps `{word}` to unknown tag `{tag}`")]
    UnknownTag { word: String, tag: String },
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let file: LexiconFile = serde_yaml::from_str(text)?;
        let mut words = HashMap::new();
        for (word, tag_name) in file.words {
            let tag = PosTag::parse(&tag_name).ok_or_else(|| LexiconError::UnknownTag {
                word: word.clone(),
                tag: tag_name.clone(),
            })?;
            words.insert(word.to_lowercase(), tag);
        }
        let suffix_rules = file
            .suffix_rules
            .into_iter()
            .map(|rule| {
                let tag = PosTag::parse(&rule.tag).ok_or_else(|| LexiconError::UnknownTag {
                    word: format!("-{}", rule.suffix),
                    tag: rule.tag.clone(),
                })?;
                Ok((rule.suffix.to_lowercase(), tag))
            })
            .collect::<Result<_, LexiconError>>()?;
        Ok(Lexicon {
            words,
            sentence_start_verbs: file
                .sentence_start_verbs
                .into_iter()
                .map(|w| w.to_lowercase())
                .collect(),
            suffix_rules,
        })
    }

    pub fn bundled() -> Self {
        Lexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

/// Tag a token stream. Rules fire in a fixed order; the first hit wins.
pub fn tag(tokens: &[RawToken], lexicon: &Lexicon) -> Vec<Token> {
    let mut tagged: Vec<Token> = Vec::with_capacity(tokens.len());
    for (position, token) in tokens.iter().enumerate() {
        let tag = tag_one(token, position, tagged.last().map(|t| t.tag), lexicon);
        tagged.push(Token {
            text: token.text.clone(),
            tag,
            start: token.start,
            end: token.end,
        });
    }
    tagged
}

fn tag_one(token: &RawToken, position: usize, prev: Option<PosTag>, lexicon: &Lexicon) -> PosTag {
    let text = token.text.as_str();
    match text {
        ">>" => return PosTag::Sym,
        "." => return PosTag::Period,
        "(" => return PosTag::Open,
        ")" => return PosTag::Close,
        ":" | "," | ";" => return PosTag::Colon,
        _ => {}
    }
    if !text.is_empty() && text.chars().all(|c| c.is_ascii_digit()) {
        return PosTag::Cd;
    }
    let lower = text.to_lowercase();
    // imperative verbs only at the sentence start; the same word capitalized
    // mid-sentence is part of a policy name
    if position == 0 && lexicon.sentence_start_verbs.contains(&lower) {
        return PosTag::Vb;
    }
    if prev == Some(PosTag::To) && (lower == "enabled" || lower == "disabled") {
        return PosTag::Vb;
    }
    if let Some(tag) = lexicon.words.get(&lower) {
        return *tag;
    }
    if text.chars().next().is_some_and(|c| c.is_uppercase()) {
        return PosTag::Nnp;
    }
    for (suffix, tag) in &lexicon.suffix_rules {
        if lower.len() > suffix.len() + 1 && lower.ends_with(suffix.as_str()) {
            if suffix == "s" && lower.ends_with("ss") {
                continue;
            }
            return *tag;
        }
    }
    PosTag::Nn
}
