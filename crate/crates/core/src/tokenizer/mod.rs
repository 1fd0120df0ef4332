//! Stage 1: complex words.
//!
//! Text is segmented into word and punctuation tokens, each looked up in the
//! [`Lexicon`]. The entity microgrammars in [`entities`] then fuse multiwords
//! and recognize company and person names, locations, dates, times and
//! currency amounts.

pub mod entities;
pub mod lexicon;
pub mod normalize;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use entities::{
    contextual_name_typing, recognize_entities, ContextRules, EntityKind, EntityMention,
    EntityValue,
};
pub use lexicon::{LexEntry, Lexicon, LexiconError, WordClass};
pub use normalize::{CalendarDate, ClockTime, Money};

/// Half-open byte range into the document text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn cover(&self, other: &Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub span: Span,
    pub lexical_classes: BTreeSet<WordClass>,
    pub lemma: String,
    pub verb_lemma: Option<String>,
    pub attrs: BTreeMap<String, String>,
}

impl Token {
    pub fn has(&self, class: WordClass) -> bool {
        self.lexical_classes.contains(&class)
    }

    pub fn is_unknown(&self) -> bool {
        self.has(WordClass::Unknown)
    }

    pub fn is_capitalized(&self) -> bool {
        self.surface.chars().next().is_some_and(char::is_uppercase)
    }

    pub fn is_number(&self) -> bool {
        self.has(WordClass::Num)
    }

    pub fn is_closed_class(&self) -> bool {
        self.lexical_classes.iter().any(|c| c.is_closed())
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Splits text into (byte offset, surface) pieces: maximal alphanumeric runs
/// (keeping internal hyphens and digit-group separators) and single
/// punctuation characters. A possessive `'s` stays one piece.
pub(crate) fn split_words(text: &str) -> Vec<(usize, &str)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let offset = |i: usize| chars.get(i).map_or(text.len(), |&(o, _)| o);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_word_char(c) {
            i += 1;
            loop {
                match at(i) {
                    Some(c) if is_word_char(c) => i += 1,
                    Some('-') if at(i + 1).is_some_and(is_word_char) => i += 2,
                    Some(',' | '.')
                        if at(i - 1).is_some_and(|p| p.is_ascii_digit())
                            && at(i + 1).is_some_and(|n| n.is_ascii_digit())
                            && text[offset(start)..offset(i)]
                                .chars()
                                .all(|d| d.is_ascii_digit() || d == ',' || d == '.') =>
                    {
                        i += 2
                    }
                    _ => break,
                }
            }
        } else if matches!(c, '\'' | '\u{2019}')
            && matches!(at(i + 1), Some('s' | 'S'))
            && !at(i + 2).is_some_and(is_word_char)
            && start > 0
            && at(start - 1).is_some_and(is_word_char)
        {
            i += 2;
        } else {
            i += 1;
        }
        out.push((offset(start), &text[offset(start)..offset(i)]));
    }
    out
}

fn is_numeric(surface: &str) -> bool {
    surface.chars().next().is_some_and(|c| c.is_ascii_digit())
        && surface.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.')
}

/// Segments `text` into tokens and fills their word classes from `lexicon`.
/// Words absent from the lexicon get the class `unknown`.
pub fn tokenize(text: &str, lexicon: &Lexicon) -> Vec<Token> {
    split_words(text)
        .into_iter()
        .map(|(start, surface)| {
            let lower = surface.to_lowercase();
            let span = Span::new(start, start + surface.len());
            let mut token = Token {
                surface: surface.to_string(),
                lower: lower.clone(),
                span,
                lexical_classes: BTreeSet::new(),
                lemma: lower.clone(),
                verb_lemma: None,
                attrs: BTreeMap::new(),
            };
            if let Some(entry) = lexicon.get(&lower) {
                token.lexical_classes = entry.classes.clone();
                token.lemma = entry.lemma.clone();
                token.verb_lemma = entry.verb_lemma.clone();
                token.attrs = entry.attrs.clone();
            }
            if is_numeric(surface) {
                token.lexical_classes.insert(WordClass::Num);
            }
            if matches!(surface, "\"" | "'" | "`" | "\u{201c}" | "\u{201d}" | "\u{2018}" | "\u{2019}") {
                token.lexical_classes.insert(WordClass::Quote);
            }
            if token.lexical_classes.is_empty() {
                token.lexical_classes.insert(WordClass::Unknown);
            }
            token
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text, &Lexicon::new()).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(tokenize("", &Lexicon::new()).is_empty());
        assert!(tokenize("   \n\t", &Lexicon::new()).is_empty());
    }

    #[test]
    fn token_count_matches_whitespace_split_for_plain_words() {
        let text = "set up a joint venture";
        assert_eq!(tokenize(text, &Lexicon::new()).len(), text.split_whitespace().count());
    }

    #[test]
    fn punctuation_is_split_and_hyphens_kept() {
        assert_eq!(
            surfaces("President-elect Alfredo, (FMLN)."),
            ["President-elect", "Alfredo", ",", "(", "FMLN", ")", "."]
        );
    }

    #[test]
    fn numbers_keep_group_separators() {
        assert_eq!(surfaces("20,000 clubs, 5.5 kg"), ["20,000", "clubs", ",", "5.5", "kg"]);
        assert_eq!(surfaces("1990."), ["1990", "."]);
    }

    #[test]
    fn currency_symbol_splits() {
        assert_eq!(surfaces("NT$20000000"), ["NT", "$", "20000000"]);
    }

    #[test]
    fn possessive_is_one_token() {
        assert_eq!(surfaces("XYZ's sales"), ["XYZ", "'s", "sales"]);
        assert_eq!(surfaces("'metal wood'"), ["'", "metal", "wood", "'"]);
    }

    #[test]
    fn spans_slice_back_to_surface() {
        let text = "Bridgestone Sports Co. said Friday";
        for t in tokenize(text, &Lexicon::new()) {
            assert_eq!(t.span.slice(text), t.surface);
        }
    }

    #[test]
    fn unknown_words_are_marked() {
        let lex = Lexicon::parse("the\tdet\n").unwrap();
        let toks = tokenize("the zorp 42", &lex);
        assert!(toks[0].has(WordClass::Det));
        assert!(toks[1].is_unknown());
        assert!(toks[2].is_number() && !toks[2].is_unknown());
    }
}
