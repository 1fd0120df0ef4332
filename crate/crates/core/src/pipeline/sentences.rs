use std::collections::BTreeSet;

use crate::tokenizer::Span;

/// Replaces control characters with spaces and collapses whitespace runs to
/// one space, keeping paragraph breaks as a blank line. All spans downstream
/// refer to this text.
pub fn sanitize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending: Option<usize> = None;
    for c in text.chars() {
        let c = if c.is_control() && c != '\n' { ' ' } else { c };
        if c.is_whitespace() {
            let newlines = pending.get_or_insert(0);
            if c == '\n' {
                *newlines += 1;
            }
            continue;
        }
        if let Some(n) = pending.take() {
            if !out.is_empty() {
                out.push_str(if n >= 2 { "\n\n" } else { " " });
            }
        }
        out.push(c);
    }
    out
}

fn is_final(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | '\u{201d}' | '\u{2019}')
}

/// Sentence spans: a break follows sentence-final punctuation (plus closing
/// quotes) when whitespace and a capital or opening quote come next, unless
/// the word ending in the period is a listed abbreviation. Blank lines always
/// break.
pub fn split_sentences(text: &str, abbreviations: &BTreeSet<String>) -> Vec<Span> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    let close = |out: &mut Vec<Span>, s: usize, e: usize| {
        let slice = &text[s..e];
        let trimmed = slice.trim_end();
        if !trimmed.is_empty() {
            out.push(Span::new(s, s + trimmed.len()));
        }
    };
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() {
            if !c.is_whitespace() {
                start = Some(pos);
            }
            i += 1;
            continue;
        }
        let s = start.expect("open sentence");
        if c == '\n' && chars.get(i + 1).is_some_and(|(_, n)| *n == '\n') {
            close(&mut out, s, pos);
            start = None;
            i += 2;
            continue;
        }
        if is_final(c) {
            let mut j = i + 1;
            while chars.get(j).is_some_and(|(_, x)| is_final(*x) || is_closing(*x)) {
                j += 1;
            }
            let space = chars.get(j).is_some_and(|(_, x)| x.is_whitespace());
            let mut k = j;
            while chars.get(k).is_some_and(|(_, x)| x.is_whitespace()) {
                k += 1;
            }
            let next_opens = chars
                .get(k)
                .is_some_and(|(_, x)| x.is_uppercase() || matches!(x, '"' | '\u{201c}' | '(' | '\'' | '`'));
            let word_start = text[s..pos].rfind(char::is_whitespace).map_or(s, |w| s + w + 1);
            let word = text[word_start..pos + c.len_utf8()].to_lowercase();
            let word = word.trim_start_matches(['(', '"']);
            let abbreviation =
                c == '.' && (abbreviations.contains(word) || abbreviations.contains(word.trim_end_matches('.')));
            let end = chars.get(j).map_or(text.len(), |(p, _)| *p);
            if j >= chars.len() || (space && next_opens && !abbreviation) {
                close(&mut out, s, end);
                start = None;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if let Some(s) = start {
        close(&mut out, s, text.len());
    }
    out
}
