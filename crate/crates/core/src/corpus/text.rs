//! Normalization and tokenization.
//!
//! Tokens are lowercase. Word tokens are maximal runs of alphanumeric
//! characters (plus combining marks); every other non-space character is a
//! one-character punctuation token. In French and Italian an apostrophe
//! between two letters closes the preceding token, so `l'hyène` becomes
//! `["l'", "hyène"]`. Typographic apostrophes are folded to `'` in token text.

use unicode_normalization::UnicodeNormalization;

use crate::lang::Language;

/// A token together with the byte range of its surface form in the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// Unicode NFC normalization.
pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

pub fn tokenize(text: &str, language: Language) -> Vec<String> {
    token_spans(text, language)
        .into_iter()
        .map(|span| span.text)
        .collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
        || matches!(c, '\u{0300}'..='\u{036F}' | '\u{0483}'..='\u{0489}' | '\u{1AB0}'..='\u{1AFF}')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

fn fold(surface: &str) -> String {
    surface
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect()
}

pub fn token_spans(text: &str, language: Language) -> Vec<TokenSpan> {
    let mut spans = Vec::new();
    let mut word_start: Option<usize> = None;
    let mut chars = text.char_indices().peekable();

    let push = |spans: &mut Vec<TokenSpan>, start: usize, end: usize| {
        spans.push(TokenSpan {
            start,
            end,
            text: fold(&text[start..end]),
        });
    };

    while let Some((i, c)) = chars.next() {
        if is_word_char(c) {
            word_start.get_or_insert(i);
            continue;
        }
        if is_apostrophe(c) && language.has_elision() {
            if let Some(start) = word_start {
                if chars.peek().is_some_and(|&(_, next)| is_word_char(next)) {
                    push(&mut spans, start, i + c.len_utf8());
                    word_start = None;
                    continue;
                }
            }
        }
        if let Some(start) = word_start.take() {
            push(&mut spans, start, i);
        }
        if !c.is_whitespace() {
            push(&mut spans, i, i + c.len_utf8());
        }
    }
    if let Some(start) = word_start {
        push(&mut spans, start, text.len());
    }
    spans
}
