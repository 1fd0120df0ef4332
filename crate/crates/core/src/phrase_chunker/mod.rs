//! Stage 2: basic phrases.
//!
//! Word units (tokens, with lexicon multiwords fused) are segmented into noun
//! groups, verb groups and particle classes by the productions of a
//! [`PhraseGrammar`]. Entity mentions from Stage 1 become single phrases of
//! their own kind and are never split by a production.

pub mod grammar;
pub mod verb_group;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tokenizer::entities::surface_of;
use crate::tokenizer::{EntityKind, EntityMention, EntityValue, Span, Token, WordClass};

pub use grammar::PhraseGrammar;
pub use verb_group::{tag_verb_group, VerbGroupError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhraseKind {
    NounGroup,
    VerbGroup,
    Preposition,
    Conjunction,
    RelativePronoun,
    ParticleAgo,
    ParticleThat,
    CompanyName,
    PersonName,
    Location,
    Date,
    Time,
    Currency,
    Comma,
}

impl PhraseKind {
    pub const ALL: [PhraseKind; 14] = [
        PhraseKind::NounGroup,
        PhraseKind::VerbGroup,
        PhraseKind::Preposition,
        PhraseKind::Conjunction,
        PhraseKind::RelativePronoun,
        PhraseKind::ParticleAgo,
        PhraseKind::ParticleThat,
        PhraseKind::CompanyName,
        PhraseKind::PersonName,
        PhraseKind::Location,
        PhraseKind::Date,
        PhraseKind::Time,
        PhraseKind::Currency,
        PhraseKind::Comma,
    ];

    /// Special kinds of noun group, accepted wherever a noun group is.
    pub fn is_nominal(self) -> bool {
        matches!(
            self,
            PhraseKind::NounGroup
                | PhraseKind::CompanyName
                | PhraseKind::PersonName
                | PhraseKind::Location
                | PhraseKind::Date
                | PhraseKind::Time
                | PhraseKind::Currency
        )
    }

    pub fn is_name(self) -> bool {
        matches!(self, PhraseKind::CompanyName | PhraseKind::PersonName | PhraseKind::Location)
    }

    pub fn ident(self) -> &'static str {
        match self {
            PhraseKind::NounGroup => "NounGroup",
            PhraseKind::VerbGroup => "VerbGroup",
            PhraseKind::Preposition => "Preposition",
            PhraseKind::Conjunction => "Conjunction",
            PhraseKind::RelativePronoun => "RelativePronoun",
            PhraseKind::ParticleAgo => "Particle-ago",
            PhraseKind::ParticleThat => "Particle-that",
            PhraseKind::CompanyName => "CompanyName",
            PhraseKind::PersonName => "PersonName",
            PhraseKind::Location => "Location",
            PhraseKind::Date => "Date",
            PhraseKind::Time => "Time",
            PhraseKind::Currency => "Currency",
            PhraseKind::Comma => "Comma",
        }
    }

    /// Display label used in traces, e.g. `Noun Group`.
    pub fn label(self) -> &'static str {
        match self {
            PhraseKind::NounGroup => "Noun Group",
            PhraseKind::VerbGroup => "Verb Group",
            PhraseKind::Preposition => "Preposition",
            PhraseKind::Conjunction => "Conjunction",
            PhraseKind::RelativePronoun => "Relative Pronoun",
            PhraseKind::ParticleAgo => "Particle (ago)",
            PhraseKind::ParticleThat => "Particle (that)",
            PhraseKind::CompanyName => "Company Name",
            PhraseKind::PersonName => "Person Name",
            PhraseKind::Location => "Location",
            PhraseKind::Date => "Date",
            PhraseKind::Time => "Time",
            PhraseKind::Currency => "Currency",
            PhraseKind::Comma => "Comma",
        }
    }

    fn from_entity(kind: EntityKind) -> Option<PhraseKind> {
        match kind {
            EntityKind::CompanyName => Some(PhraseKind::CompanyName),
            EntityKind::PersonName => Some(PhraseKind::PersonName),
            EntityKind::Location => Some(PhraseKind::Location),
            EntityKind::Date => Some(PhraseKind::Date),
            EntityKind::Time => Some(PhraseKind::Time),
            EntityKind::Currency => Some(PhraseKind::Currency),
            EntityKind::Multiword => None,
        }
    }
}

impl fmt::Display for PhraseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ident())
    }
}

impl FromStr for PhraseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_ascii_lowercase();
        let k = match key.as_str() {
            "ng" | "noungroup" => PhraseKind::NounGroup,
            "vg" | "verbgroup" => PhraseKind::VerbGroup,
            "prep" | "preposition" => PhraseKind::Preposition,
            "conj" | "conjunction" => PhraseKind::Conjunction,
            "relpro" | "relativepronoun" => PhraseKind::RelativePronoun,
            "particleago" | "ago" => PhraseKind::ParticleAgo,
            "particlethat" | "that" => PhraseKind::ParticleThat,
            "companyname" | "company" => PhraseKind::CompanyName,
            "personname" | "person" => PhraseKind::PersonName,
            "location" => PhraseKind::Location,
            "date" => PhraseKind::Date,
            "time" => PhraseKind::Time,
            "currency" => PhraseKind::Currency,
            "comma" => PhraseKind::Comma,
            _ => return Err(s.to_string()),
        };
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VoiceTag {
    Active,
    Passive,
    ActivePassive,
    Gerund,
    Infinitive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbFeatures {
    pub voice_tag: VoiceTag,
    pub is_predicate_adjective: bool,
    pub negated: bool,
    /// The group begins with infinitival "to" (also set for "to be shipped").
    pub to_infinitive: bool,
    /// "is to" / "are to be" constructions.
    pub be_to: bool,
    /// The main verb is a form of "be".
    pub copula: bool,
    /// Lowercased auxiliaries in order, adverbs excluded.
    pub auxiliaries: Vec<String>,
}

/// A word unit: a single token or a lexicon multiword spanning several tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub tokens: Range<usize>,
    pub span: Span,
    pub text: String,
    pub lower: String,
    pub lemma: String,
    pub verb_lemma: Option<String>,
    pub classes: BTreeSet<WordClass>,
    pub attrs: BTreeMap<String, String>,
}

impl Unit {
    pub fn has(&self, class: WordClass) -> bool {
        self.classes.contains(&class)
    }

    pub fn is_capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }

    pub fn from_token(index: usize, token: &Token) -> Unit {
        Unit {
            tokens: index..index + 1,
            span: token.span,
            text: token.surface.clone(),
            lower: token.lower.clone(),
            lemma: token.lemma.clone(),
            verb_lemma: token.verb_lemma.clone(),
            classes: token.lexical_classes.clone(),
            attrs: token.attrs.clone(),
        }
    }

    /// A free-standing unit, for tests and hand-built inputs.
    pub fn synthetic(lower: &str, classes: &[WordClass]) -> Unit {
        Unit {
            tokens: 0..1,
            span: Span::new(0, lower.len()),
            text: lower.to_string(),
            lower: lower.to_string(),
            lemma: lower.to_string(),
            verb_lemma: classes.iter().any(|c| c.is_verbal()).then(|| lower.to_string()),
            classes: classes.iter().copied().collect(),
            attrs: BTreeMap::new(),
        }
    }

    /// Word used for head indexing: the verb lemma for verbal units, else the lemma.
    pub fn head_word(&self) -> &str {
        self.verb_lemma.as_deref().unwrap_or(&self.lemma)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phrase {
    pub kind: PhraseKind,
    pub span: Span,
    pub tokens: Range<usize>,
    pub text: String,
    pub units: Vec<Unit>,
    /// Index into `units`: the final nominal for noun groups, the main verb
    /// (or predicate adjective) for verb groups.
    pub head: usize,
    pub verb: Option<VerbFeatures>,
    pub mention: Option<EntityMention>,
}

impl Phrase {
    pub fn head_unit(&self) -> &Unit {
        &self.units[self.head]
    }

    /// Normalized name for name kinds, otherwise the surface text.
    pub fn normalized(&self) -> &str {
        self.mention.as_ref().map_or(&self.text, |m| &m.normalized)
    }

    pub fn voice(&self) -> Option<VoiceTag> {
        self.verb.as_ref().map(|v| v.voice_tag)
    }

    /// Units left of the head, minus determiners, quantifiers and numbers.
    pub fn modifiers(&self) -> &[Unit] {
        let start = self.units[..self.head]
            .iter()
            .position(|u| {
                !(u.has(WordClass::Det) || u.has(WordClass::Quant) || u.has(WordClass::NumAdv) || u.has(WordClass::Num))
            })
            .unwrap_or(self.head);
        &self.units[start..self.head]
    }

    pub fn is_definite(&self) -> bool {
        self.units.first().is_some_and(|u| matches!(u.lower.as_str(), "the" | "this" | "that" | "these" | "those"))
    }
}

/// Units for a token sequence: lexicon multiwords are fused, other mentions
/// are left out (they are returned separately as barriers).
fn units_between(tokens: &[Token], range: Range<usize>, multiwords: &[&EntityMention]) -> Vec<Unit> {
    let mut out = Vec::new();
    let mut i = range.start;
    while i < range.end {
        if let Some(m) = multiwords.iter().find(|m| m.tokens.start == i && m.tokens.end <= range.end) {
            if let EntityValue::Lexical(entry) = &m.value {
                let toks = &tokens[m.tokens.clone()];
                let text = surface_of(toks);
                out.push(Unit {
                    tokens: m.tokens.clone(),
                    span: m.span,
                    lower: toks.iter().map(|t| t.lower.as_str()).collect::<Vec<_>>().join(" "),
                    text,
                    lemma: entry.lemma.clone(),
                    verb_lemma: entry.verb_lemma.clone(),
                    classes: entry.classes.clone(),
                    attrs: entry.attrs.clone(),
                });
                i = m.tokens.end;
                continue;
            }
        }
        out.push(Unit::from_token(i, &tokens[i]));
        i += 1;
    }
    out
}

fn mention_phrase(tokens: &[Token], m: &EntityMention, kind: PhraseKind) -> Phrase {
    let toks = &tokens[m.tokens.clone()];
    let text = surface_of(toks);
    let mut classes: BTreeSet<WordClass> = BTreeSet::new();
    classes.insert(match kind {
        PhraseKind::CompanyName => WordClass::Company,
        PhraseKind::Location => WordClass::Location,
        PhraseKind::Date => WordClass::Temporal,
        PhraseKind::Time => WordClass::Temporal,
        PhraseKind::Currency => WordClass::Currency,
        _ => WordClass::Noun,
    });
    let unit = Unit {
        tokens: m.tokens.clone(),
        span: m.span,
        lower: text.to_lowercase(),
        lemma: m.normalized.to_lowercase(),
        verb_lemma: None,
        text: text.clone(),
        classes,
        attrs: BTreeMap::new(),
    };
    Phrase {
        kind,
        span: m.span,
        tokens: m.tokens.clone(),
        text,
        units: vec![unit],
        head: 0,
        verb: None,
        mention: Some(m.clone()),
    }
}

/// Builds a phrase over `units`, tagging verb groups. Verb groups rejected by
/// the tagger are dropped.
fn grammar_phrase(tokens: &[Token], kind: PhraseKind, units: Vec<Unit>) -> Option<Phrase> {
    let first = units.first()?;
    let last = units.last()?;
    let token_range = first.tokens.start..last.tokens.end;
    let verb = if kind == PhraseKind::VerbGroup { Some(tag_verb_group(&units).ok()?) } else { None };
    Some(Phrase {
        kind,
        span: first.span.cover(&last.span),
        text: surface_of(&tokens[token_range.clone()]),
        tokens: token_range,
        head: units.len() - 1,
        units,
        verb,
        mention: None,
    })
}

/// Chunks with the built-in grammar.
pub fn chunk(tokens: &[Token], mentions: &[EntityMention]) -> Vec<Phrase> {
    thread_local! {
        static BUILTIN: PhraseGrammar = PhraseGrammar::builtin();
    }
    BUILTIN.with(|g| chunk_with(g, tokens, mentions))
}

pub fn chunk_with(grammar: &PhraseGrammar, tokens: &[Token], mentions: &[EntityMention]) -> Vec<Phrase> {
    let multiwords: Vec<&EntityMention> = mentions.iter().filter(|m| m.kind == EntityKind::Multiword).collect();
    // (phrase, rank) where rank orders ties on identical spans.
    let mut candidates: Vec<(Phrase, usize)> = Vec::new();
    let mut barriers: Vec<&EntityMention> = mentions.iter().filter(|m| m.kind != EntityKind::Multiword).collect();
    barriers.sort_by_key(|m| m.tokens.start);

    let mut segment_start = 0;
    let mut regions: Vec<Range<usize>> = Vec::new();
    for m in &barriers {
        if let Some(kind) = PhraseKind::from_entity(m.kind) {
            candidates.push((mention_phrase(tokens, m, kind), 0));
        }
        regions.push(segment_start..m.tokens.start);
        segment_start = m.tokens.end;
    }
    regions.push(segment_start..tokens.len());

    for region in regions.into_iter().filter(|r| !r.is_empty()) {
        let units = units_between(tokens, region, &multiwords);
        for start in 0..units.len() {
            for (rank, prod) in grammar.productions.iter().enumerate() {
                if let Some(len) = prod.nfa.longest_prefix(&units[start..]) {
                    let slice = units[start..start + len].to_vec();
                    if let Some(p) = grammar_phrase(tokens, prod.kind, slice) {
                        candidates.push((p, rank + 1));
                    }
                }
            }
        }
    }
    select(candidates)
}

/// Drops every phrase subsumed by a strictly larger one, and all but the
/// best-ranked phrase among those with identical spans.
fn select(mut candidates: Vec<(Phrase, usize)>) -> Vec<Phrase> {
    candidates.sort_by(|(a, ra), (b, rb)| {
        a.span.start.cmp(&b.span.start).then(b.span.end.cmp(&a.span.end)).then(ra.cmp(rb))
    });
    candidates.dedup_by(|(later, _), (earlier, _)| later.span == earlier.span);
    let spans: Vec<Span> = candidates.iter().map(|(p, _)| p.span).collect();
    let mut out: Vec<Phrase> = candidates
        .into_iter()
        .filter(|(p, _)| !spans.iter().any(|s| *s != p.span && s.contains(&p.span)))
        .map(|(p, _)| p)
        .collect();
    out.sort_by_key(|p| (p.span.start, p.span.end));
    out
}

/// One `Label: text` line per phrase.
pub fn render_phrases(phrases: &[Phrase]) -> String {
    phrases.iter().map(|p| format!("{}: {}\n", p.kind.label(), p.text)).collect()
}

#[cfg(test)]
mod tests;
