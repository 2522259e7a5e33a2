//! Deterministic tokenizer for guide prose.
//!
//! The rules reflect how DISA and CIS write implementation steps:
//! - `>>` is a single token (the UI path separator)
//! - a double-quoted span is one token; the quotes are stripped from the
//!   token text but stay inside its source span
//! - `(`, `)`, `.`, `:`, `,`, `;` are their own tokens
//!
//! Every token carries its byte span in the source so captured phrases can
//! be sliced back out verbatim.

/// A token with its source span (`start..end`, byte offsets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Token texts only; see [`tokenize_spans`] for the span-carrying form.
pub fn tokenize(sentence: &str) -> Vec<String> {
    tokenize_spans(sentence)
        .into_iter()
        .map(|t| t.text)
        .collect()
}

pub fn tokenize_spans(sentence: &str) -> Vec<RawToken> {
    let chars: Vec<(usize, char)> = sentence.char_indices().collect();
    let byte_end = |index: usize| -> usize {
        chars
            .get(index)
            .map(|(offset, _)| *offset)
            .unwrap_or(sentence.len())
    };
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '"' {
            if let Some(close) = chars[i + 1..].iter().position(|(_, c)| *c == '"') {
                let close_index = i + 1 + close;
                let end = byte_end(close_index + 1);
                tokens.push(RawToken {
                    text: sentence[byte_end(i + 1)..chars[close_index].0].to_string(),
                    start: offset,
                    end,
                });
                i = close_index + 1;
                continue;
            }
            // unterminated quote: fall through and treat it as a word char
        }
        if c == '>' && matches!(chars.get(i + 1), Some((_, '>'))) {
            tokens.push(RawToken {
                text: ">>".to_string(),
                start: offset,
                end: byte_end(i + 2),
            });
            i += 2;
            continue;
        }
        if matches!(c, '(' | ')' | '.' | ':' | ',' | ';') {
            tokens.push(RawToken {
                text: c.to_string(),
                start: offset,
                end: byte_end(i + 1),
            });
            i += 1;
            continue;
        }
        // a word runs until whitespace, a quote, or one of the split chars
        let start = i;
        while i < chars.len() {
            let (_, c) = chars[i];
            if c.is_whitespace()
                || matches!(c, '"' | '(' | ')' | ':' | ',' | ';')
                || (c == '>' && matches!(chars.get(i + 1), Some((_, '>'))))
            {
                break;
            }
            i += 1;
        }
        let mut end = i;
        // a trailing period is sentence punctuation, not part of the word
        if end > start + 1 && chars[end - 1].1 == '.' {
            end -= 1;
        }
        if end > start {
            tokens.push(RawToken {
                text: sentence[chars[start].0..byte_end(end)].to_string(),
                start: chars[start].0,
                end: byte_end(end),
            });
        }
        for (dot, (offset, _)) in chars.iter().enumerate().take(i).skip(end) {
            tokens.push(RawToken {
                text: ".".to_string(),
                start: *offset,
                end: byte_end(dot + 1),
            });
        }
    }
    tokens
}
