//! Name and fixed-form microgrammars.
//!
//! Every microgrammar proposes candidate mentions at every token position; the
//! selection step keeps the leftmost-longest non-overlapping set, breaking ties
//! between kinds of equal extent by [`EntityKind`] order.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::lexicon::{LexEntry, Lexicon, WordClass};
use super::normalize::{month_number, CalendarDate, ClockTime, Money};
use super::{Span, Token};

/// Mention kinds, in tie-break precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    CompanyName,
    PersonName,
    Location,
    Date,
    Time,
    Currency,
    Multiword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntityValue {
    Name,
    Date(CalendarDate),
    Time(ClockTime),
    Money(Money),
    /// A fused multiword carrying its lexicon entry.
    Lexical(LexEntry),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub kind: EntityKind,
    pub span: Span,
    pub tokens: Range<usize>,
    /// Canonical string: the formatted value for dates, times and currency,
    /// the bare name (without titles) for people, the gazetteer canonical
    /// name or surface otherwise.
    pub normalized: String,
    pub value: EntityValue,
}

/// Cues for typing unknown capitalized words from their immediate context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextRules {
    /// Nouns that, after a possessive, reveal the possessor is a company.
    pub possessive_company_cues: Vec<String>,
    /// `Name, <age>, <title>` reveals a person.
    pub age_appositive_person: bool,
}

impl Default for ContextRules {
    fn default() -> Self {
        ContextRules {
            possessive_company_cues: [
                "sales", "profits", "profit", "revenue", "revenues", "earnings", "shares",
                "stock", "subsidiary", "shareholders", "products",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            age_appositive_person: true,
        }
    }
}

/// Rebuilds the surface of a token range, inserting a space wherever the
/// original text had whitespace.
pub fn surface_of(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && tokens[i - 1].span.end < t.span.start {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

#[derive(Debug, Clone)]
struct Candidate {
    kind: EntityKind,
    start: usize,
    end: usize,
    normalized: String,
    value: EntityValue,
}

/// Lexicon entries (single or multiword) matching at `i`, with their length.
fn lexicon_matches<'a>(tokens: &[Token], i: usize, lexicon: &'a Lexicon) -> Vec<(usize, &'a LexEntry)> {
    let max = lexicon.max_multiword(&tokens[i].lower);
    let mut out = Vec::new();
    let mut key = String::new();
    for len in 1..=max.min(tokens.len() - i) {
        if len > 1 {
            key.push(' ');
        }
        key.push_str(&tokens[i + len - 1].lower);
        if let Some(e) = lexicon.get(&key) {
            out.push((len, e));
        }
    }
    out
}

fn name_capable(t: &Token) -> bool {
    t.is_capitalized()
        && t.surface.chars().next().is_some_and(char::is_alphabetic)
        && !t.is_closed_class()
        && !t.has(WordClass::Designator)
}

fn personal_name_word(t: &Token) -> bool {
    t.is_capitalized()
        && t.surface.chars().next().is_some_and(char::is_alphabetic)
        && (t.is_unknown() || t.has(WordClass::FirstName))
}

fn acronym_gloss(tokens: &[Token], end: usize) -> usize {
    if end + 2 < tokens.len()
        && tokens[end].surface == "("
        && tokens[end + 2].surface == ")"
        && tokens[end + 1].surface.len() > 1
        && tokens[end + 1].surface.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
    {
        end + 3
    } else {
        end
    }
}

fn company_candidates(tokens: &[Token], lexicon: &Lexicon, out: &mut Vec<Candidate>) {
    for i in 0..tokens.len() {
        if name_capable(&tokens[i]) {
            let mut j = i + 1;
            while j < tokens.len() {
                let t = &tokens[j];
                if t.has(WordClass::Designator) && t.is_capitalized() {
                    let mut end = j + 1;
                    if end < tokens.len() && tokens[end].surface == "." && tokens[end].span.start == t.span.end {
                        end += 1;
                    }
                    let end = acronym_gloss(tokens, end);
                    out.push(Candidate {
                        kind: EntityKind::CompanyName,
                        start: i,
                        end,
                        normalized: surface_of(&tokens[i..end]),
                        value: EntityValue::Name,
                    });
                }
                if !name_capable(t) {
                    break;
                }
                j += 1;
            }
        }
        for (len, entry) in lexicon_matches(tokens, i, lexicon) {
            if entry.has(WordClass::Company) {
                let end = acronym_gloss(tokens, i + len);
                let normalized = entry
                    .attrs
                    .get("canonical")
                    .cloned()
                    .unwrap_or_else(|| surface_of(&tokens[i..i + len]));
                out.push(Candidate {
                    kind: EntityKind::CompanyName,
                    start: i,
                    end,
                    normalized,
                    value: EntityValue::Name,
                });
            }
        }
    }
}

/// Length of a title (single or multiword) starting at `i`, if any.
fn title_at(tokens: &[Token], i: usize, lexicon: &Lexicon) -> Option<usize> {
    let len = lexicon_matches(tokens, i, lexicon)
        .into_iter()
        .filter(|(_, e)| e.has(WordClass::Title))
        .map(|(len, _)| len)
        .max()?;
    let mut end = i + len;
    if end < tokens.len() && tokens[end].surface == "." && tokens[end].span.start == tokens[end - 1].span.end {
        end += 1;
    }
    Some(end - i)
}

fn person_candidates(tokens: &[Token], lexicon: &Lexicon, out: &mut Vec<Candidate>) {
    for i in 0..tokens.len() {
        let mut j = i;
        while let Some(len) = title_at(tokens, j, lexicon) {
            j += len;
            if j >= tokens.len() {
                break;
            }
        }
        let titled = j > i;
        let name_start = j;
        while j < tokens.len() && personal_name_word(&tokens[j]) {
            j += 1;
        }
        let names = j - name_start;
        let accept = if titled {
            names >= 1
        } else {
            names >= 2 && tokens[name_start].has(WordClass::FirstName)
        };
        if accept {
            out.push(Candidate {
                kind: EntityKind::PersonName,
                start: i,
                end: j,
                normalized: surface_of(&tokens[name_start..j]),
                value: EntityValue::Name,
            });
        }
    }
}

fn location_and_multiword_candidates(tokens: &[Token], lexicon: &Lexicon, out: &mut Vec<Candidate>) {
    for i in 0..tokens.len() {
        for (len, entry) in lexicon_matches(tokens, i, lexicon) {
            let surface = surface_of(&tokens[i..i + len]);
            if entry.has(WordClass::Location) {
                out.push(Candidate {
                    kind: EntityKind::Location,
                    start: i,
                    end: i + len,
                    normalized: entry.attrs.get("canonical").cloned().unwrap_or(surface),
                    value: EntityValue::Name,
                });
            } else if len > 1 && !entry.has(WordClass::Company) {
                out.push(Candidate {
                    kind: EntityKind::Multiword,
                    start: i,
                    end: i + len,
                    normalized: entry.lemma.clone(),
                    value: EntityValue::Lexical(entry.clone()),
                });
            }
        }
    }
}

fn small_number(t: &Token, max: u32, digits: Range<usize>) -> Option<u32> {
    if !t.surface.chars().all(|c| c.is_ascii_digit()) || !digits.contains(&t.surface.len()) {
        return None;
    }
    t.surface.parse().ok().filter(|n| *n <= max)
}

fn month_at(tokens: &[Token], i: usize) -> Option<(u8, usize)> {
    let t = tokens.get(i)?;
    if !t.is_capitalized() {
        return None;
    }
    let m = month_number(&t.lower)?;
    // "May" the modal needs a number after it to read as a month.
    if t.lower == "may" && !tokens.get(i + 1).is_some_and(|n| n.is_number()) {
        return None;
    }
    let mut end = i + 1;
    if tokens.get(end).is_some_and(|n| n.surface == "." && n.span.start == t.span.end) {
        end += 1;
    }
    Some((m, end))
}

fn year_at(tokens: &[Token], i: usize, allow_short: bool) -> Option<i32> {
    let t = tokens.get(i)?;
    if let Some(y) = small_number(t, 2999, 4..5) {
        return (1000..=2999).contains(&y).then_some(y as i32);
    }
    if allow_short {
        return small_number(t, 99, 2..3).map(|y| 1900 + y as i32);
    }
    None
}

fn date_candidates(tokens: &[Token], out: &mut Vec<Candidate>) {
    let mut push = |start: usize, end: usize, date: CalendarDate| {
        out.push(Candidate {
            kind: EntityKind::Date,
            start,
            end,
            normalized: date.to_string(),
            value: EntityValue::Date(date),
        });
    };
    for i in 0..tokens.len() {
        // Day Month [Year]
        if let Some(day) = small_number(&tokens[i], 31, 1..3).filter(|d| *d > 0) {
            if let Some((month, end)) = month_at(tokens, i + 1) {
                let (year, end) = match year_at(tokens, end, true) {
                    Some(y) => (Some(y), end + 1),
                    None => (None, end),
                };
                push(i, end, CalendarDate { year, month: Some(month), day: Some(day as u8) });
            }
        }
        // Month [Day] [,] [Year]
        if let Some((month, mut end)) = month_at(tokens, i) {
            let mut day = None;
            if let Some(d) = tokens.get(end).and_then(|t| small_number(t, 31, 1..3)).filter(|d| *d > 0) {
                day = Some(d as u8);
                end += 1;
            }
            let mut year = None;
            let comma = tokens.get(end).is_some_and(|t| t.surface == ",");
            let at = if comma && day.is_some() { end + 1 } else { end };
            if let Some(y) = year_at(tokens, at, day.is_some()) {
                year = Some(y);
                end = at + 1;
            }
            if day.is_some() || year.is_some() {
                push(i, end, CalendarDate { year, month: Some(month), day });
            }
        }
    }
}

fn time_candidates(tokens: &[Token], out: &mut Vec<Candidate>) {
    let meridiem = |i: usize| -> Option<(usize, &'static str)> {
        let t = tokens.get(i)?;
        match t.lower.as_str() {
            "am" => Some((i + 1, "am")),
            "pm" => Some((i + 1, "pm")),
            "a" | "p" => {
                let ok = tokens.get(i + 1)?.surface == "."
                    && tokens.get(i + 2)?.lower == "m"
                    && tokens.get(i + 3).is_some_and(|t| t.surface == ".");
                ok.then_some((i + 4, if t.lower == "a" { "am" } else { "pm" }))
            }
            _ => None,
        }
    };
    for i in 0..tokens.len() {
        let Some(h) = small_number(&tokens[i], 24, 1..3) else { continue };
        let (mut end, mut text) = (i + 1, h.to_string());
        let mut has_minutes = false;
        if tokens.get(i + 1).is_some_and(|t| t.surface == ":") {
            if let Some(m) = tokens.get(i + 2).and_then(|t| small_number(t, 59, 2..3)) {
                end = i + 3;
                text = format!("{h}:{m:02}");
                has_minutes = true;
            }
        }
        let mut has_meridiem = false;
        if let Some((e, suffix)) = meridiem(end) {
            end = e;
            text.push_str(suffix);
            has_meridiem = true;
        }
        if !(has_minutes || has_meridiem) {
            continue;
        }
        if let Ok(time) = text.parse::<ClockTime>() {
            out.push(Candidate {
                kind: EntityKind::Time,
                start: i,
                end,
                normalized: time.to_string(),
                value: EntityValue::Time(time),
            });
        }
    }
}

fn scale_at(tokens: &[Token], i: usize) -> Option<u32> {
    tokens.get(i)?.attrs.get("scale")?.parse().ok()
}

fn currency_candidates(tokens: &[Token], lexicon: &Lexicon, out: &mut Vec<Candidate>) {
    let code_of = |e: &LexEntry| e.attrs.get("code").cloned();
    for i in 0..tokens.len() {
        // [Prefix] Symbol Number [Scale]
        let (sym_at, prefix_code) = match tokens.get(i) {
            Some(t) if t.has(WordClass::Currency) && t.attrs.contains_key("prefix") => {
                let adjacent = tokens.get(i + 1).is_some_and(|s| {
                    s.attrs.contains_key("symbol") && s.span.start == t.span.end
                });
                if adjacent {
                    (i + 1, t.attrs.get("code").cloned())
                } else {
                    (usize::MAX, None)
                }
            }
            _ => (i, None),
        };
        if let Some(sym) = tokens.get(sym_at).filter(|t| t.attrs.contains_key("symbol")) {
            if let Some(num) = tokens.get(sym_at + 1).filter(|t| t.is_number()) {
                let code = prefix_code.or_else(|| sym.attrs.get("code").cloned()).unwrap_or_default();
                let (scale, end) = match scale_at(tokens, sym_at + 2) {
                    Some(s) => (s, sym_at + 3),
                    None => (0, sym_at + 2),
                };
                if let Some(money) = Money::from_written(&num.surface, scale, &code) {
                    out.push(Candidate {
                        kind: EntityKind::Currency,
                        start: i,
                        end,
                        normalized: money.to_string(),
                        value: EntityValue::Money(money),
                    });
                }
            }
        }
        // Number [Scale] Unit
        if tokens[i].is_number() && tokens[i].surface.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            let (scale, unit_at) = match scale_at(tokens, i + 1) {
                Some(s) => (s, i + 2),
                None => (0, i + 1),
            };
            if unit_at >= tokens.len() {
                continue;
            }
            for (len, entry) in lexicon_matches(tokens, unit_at, lexicon) {
                if !entry.has(WordClass::Currency) || entry.attrs.contains_key("prefix") || entry.attrs.contains_key("symbol") {
                    continue;
                }
                let Some(code) = code_of(entry) else { continue };
                if let Some(money) = Money::from_written(&tokens[i].surface, scale, &code) {
                    out.push(Candidate {
                        kind: EntityKind::Currency,
                        start: i,
                        end: unit_at + len,
                        normalized: money.to_string(),
                        value: EntityValue::Money(money),
                    });
                }
            }
        }
    }
}

fn select(tokens: &[Token], mut candidates: Vec<Candidate>) -> Vec<EntityMention> {
    candidates.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then((b.end - b.start).cmp(&(a.end - a.start)))
            .then(a.kind.cmp(&b.kind))
    });
    let mut out: Vec<EntityMention> = Vec::new();
    let mut covered_to = 0;
    for c in candidates {
        if c.start < covered_to || c.end <= c.start {
            continue;
        }
        covered_to = c.end;
        out.push(EntityMention {
            kind: c.kind,
            span: tokens[c.start].span.cover(&tokens[c.end - 1].span),
            tokens: c.start..c.end,
            normalized: c.normalized,
            value: c.value,
        });
    }
    out
}

/// Runs every microgrammar and returns the maximal non-overlapping mentions.
pub fn recognize_entities(tokens: &[Token], lexicon: &Lexicon) -> Vec<EntityMention> {
    let mut candidates = Vec::new();
    company_candidates(tokens, lexicon, &mut candidates);
    person_candidates(tokens, lexicon, &mut candidates);
    location_and_multiword_candidates(tokens, lexicon, &mut candidates);
    date_candidates(tokens, &mut candidates);
    time_candidates(tokens, &mut candidates);
    currency_candidates(tokens, lexicon, &mut candidates);
    select(tokens, candidates)
}

/// Promotes unknown capitalized words to typed names when the surrounding
/// words reveal their type. Existing mentions are never retyped.
pub fn contextual_name_typing(
    tokens: &[Token],
    mentions: &[EntityMention],
    rules: &ContextRules,
) -> Vec<EntityMention> {
    let mut covered = vec![false; tokens.len()];
    for m in mentions {
        for c in &mut covered[m.tokens.clone()] {
            *c = true;
        }
    }
    let free_name = |i: usize| !covered[i] && personal_name_word(&tokens[i]);
    let mut promoted = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !free_name(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < tokens.len() && free_name(i) {
            i += 1;
        }
        let end = i;
        let at = |k: usize| tokens.get(end + k);
        let possessive = at(0).is_some_and(|t| t.lower == "'s")
            && at(1).is_some_and(|t| rules.possessive_company_cues.contains(&t.lower));
        let age_appositive = rules.age_appositive_person
            && at(0).is_some_and(|t| t.surface == ",")
            && at(1).is_some_and(|t| small_number(t, 130, 1..4).is_some())
            && at(2).is_some_and(|t| t.surface == ",")
            && at(3).is_some_and(|t| t.has(WordClass::Title));
        let kind = if possessive {
            Some(EntityKind::CompanyName)
        } else if age_appositive {
            Some(EntityKind::PersonName)
        } else {
            None
        };
        if let Some(kind) = kind {
            promoted.push(EntityMention {
                kind,
                span: tokens[start].span.cover(&tokens[end - 1].span),
                tokens: start..end,
                normalized: surface_of(&tokens[start..end]),
                value: EntityValue::Name,
            });
        }
    }
    let mut all: Vec<EntityMention> = mentions.iter().cloned().chain(promoted).collect();
    all.sort_by_key(|m| m.tokens.start);
    all
}
