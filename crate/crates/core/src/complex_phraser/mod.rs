//! Stage 3: complex noun groups and verb groups, plus seed structures.
//!
//! [`build_complex_phrases`] applies the domain-independent attachments in a
//! fixed order: measure phrases, of/for (and subcategorized) complements,
//! appositives, noun-group conjunction, verb-group conjunction. Complex verb
//! groups are collapsed afterwards by [`collapse_verb_groups`], which needs the
//! rule file's equivalence rules.

mod seeds;
mod verb_groups;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::phrase_chunker::{Phrase, PhraseKind, VoiceTag};
use crate::tokenizer::{Span, WordClass};

pub use seeds::{entity_structures, seed_structures, EntityStructure, Seed};
pub use verb_groups::{classify_complex_verb_group, collapse_verb_groups};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Modality(pub String);

impl Modality {
    pub fn existing() -> Self {
        Modality("Existing".into())
    }

    pub fn planned() -> Self {
        Modality("Planned".into())
    }
}

impl Default for Modality {
    fn default() -> Self {
        Modality::existing()
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `20,000 clubs a month` → quantity 20000, unit clubs, per month.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measure {
    pub quantity: String,
    pub unit: String,
    pub per: String,
    /// The phrases spelling the per-unit part ("a month" or "per" + "month").
    pub phrases: Vec<Phrase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpComplement {
    pub preposition: Phrase,
    pub object: ComplexPhrase,
}

impl PpComplement {
    pub fn word(&self) -> &str {
        &self.preposition.units[0].lower
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexPhrase {
    pub base: Phrase,
    pub appositives: Vec<ComplexPhrase>,
    pub pp_complements: Vec<PpComplement>,
    pub measure: Option<Measure>,
    /// Further conjuncts after `base`, all of the base's kind.
    pub conjuncts: Vec<ComplexPhrase>,
    pub modality: Option<Modality>,
    pub equivalence_class: Option<String>,
    /// Commas, conjunctions and collapsed verb-group material, in text order.
    pub absorbed: Vec<Phrase>,
    /// Extent over every constituent.
    pub span: Span,
}

impl ComplexPhrase {
    pub fn trivial(base: Phrase) -> Self {
        let modality = (base.kind == PhraseKind::VerbGroup).then(Modality::existing);
        ComplexPhrase {
            span: base.span,
            base,
            appositives: Vec::new(),
            pp_complements: Vec::new(),
            measure: None,
            conjuncts: Vec::new(),
            modality,
            equivalence_class: None,
            absorbed: Vec::new(),
        }
    }

    pub fn kind(&self) -> PhraseKind {
        self.base.kind
    }

    pub fn is_nominal(&self) -> bool {
        self.base.kind.is_nominal()
    }

    /// The base plus conjuncts.
    pub fn coordinated(&self) -> impl Iterator<Item = &ComplexPhrase> {
        std::iter::once(self).chain(self.conjuncts.iter())
    }

    /// Voice of the first verb group in a collapsed sequence, else the base voice.
    pub fn voice(&self) -> Option<VoiceTag> {
        self.absorbed
            .iter()
            .filter(|p| p.span.start < self.base.span.start)
            .find(|p| p.kind == PhraseKind::VerbGroup)
            .or(Some(&self.base))
            .and_then(Phrase::voice)
    }

    /// Every Stage 2 phrase inside this complex phrase, in text order.
    pub fn all_phrases(&self) -> Vec<&Phrase> {
        let mut out = vec![&self.base];
        out.extend(self.absorbed.iter());
        for a in &self.appositives {
            out.extend(a.all_phrases());
        }
        for c in &self.pp_complements {
            out.push(&c.preposition);
            out.extend(c.object.all_phrases());
        }
        if let Some(m) = &self.measure {
            out.extend(m.phrases.iter());
        }
        for c in &self.conjuncts {
            out.extend(c.all_phrases());
        }
        out.sort_by_key(|p| (p.span.start, p.span.end));
        out
    }

    /// Surface text of the extent, rebuilt from constituents.
    pub fn text(&self) -> String {
        let mut out = String::new();
        let mut last_end: Option<usize> = None;
        for p in self.all_phrases() {
            if let Some(end) = last_end {
                if p.kind != PhraseKind::Comma || p.span.start > end {
                    out.push(' ');
                }
            }
            out.push_str(&p.text);
            last_end = Some(p.span.end);
        }
        out
    }

    fn absorb(&mut self, p: Phrase) {
        self.span = self.span.cover(&p.span);
        self.absorbed.push(p);
    }
}

pub fn build_complex_phrases(phrases: Vec<Phrase>) -> Vec<ComplexPhrase> {
    let mut cps: Vec<ComplexPhrase> = phrases.into_iter().map(ComplexPhrase::trivial).collect();
    cps = attach_measures(cps);
    cps = attach_complements(cps);
    cps = attach_appositives(cps);
    cps = conjoin(cps, ComplexPhrase::is_nominal);
    cps = conjoin(cps, |c| c.kind() == PhraseKind::VerbGroup);
    cps
}

fn is_word(cp: &ComplexPhrase, kind: PhraseKind, words: &[&str]) -> bool {
    cp.kind() == kind && cp.base.units.len() == 1 && words.contains(&cp.base.units[0].lower.as_str())
}

fn is_plain(cp: &ComplexPhrase) -> bool {
    cp.appositives.is_empty() && cp.pp_complements.is_empty() && cp.measure.is_none() && cp.conjuncts.is_empty()
}

fn time_unit(p: &Phrase) -> Option<String> {
    let head = p.head_unit();
    (p.kind == PhraseKind::NounGroup && head.has(WordClass::Temporal)).then(|| head.lemma.clone())
}

/// Number unit? ("a" | "per") time-unit, anchored on a number-led noun group.
fn attach_measures(cps: Vec<ComplexPhrase>) -> Vec<ComplexPhrase> {
    let mut out: Vec<ComplexPhrase> = Vec::with_capacity(cps.len());
    let mut it = cps.into_iter().peekable();
    while let Some(mut cp) = it.next() {
        let quantity = leading_number(&cp.base);
        if let Some(quantity) = quantity.filter(|_| cp.kind() == PhraseKind::NounGroup && is_plain(&cp)) {
            let unit = cp.base.head_unit().text.clone();
            let next = it.peek();
            let article = next.filter(|n| {
                is_plain(n)
                    && matches!(n.base.units.first().map(|u| u.lower.as_str()), Some("a" | "an"))
                    && n.base.units.len() == 2
            });
            if let Some(per) = article.and_then(|n| time_unit(&n.base)) {
                let next = it.next().expect("peeked");
                cp.span = cp.span.cover(&next.span);
                cp.measure = Some(Measure { quantity, unit, per, phrases: vec![next.base] });
            } else if next.is_some_and(|n| is_word(n, PhraseKind::Preposition, &["per"])) {
                let prep = it.next().expect("peeked");
                match it.next_if(|n| is_plain(n) && time_unit(&n.base).is_some()) {
                    Some(noun) => {
                        let per = time_unit(&noun.base).expect("checked");
                        cp.span = cp.span.cover(&noun.span);
                        cp.measure = Some(Measure { quantity, unit, per, phrases: vec![prep.base, noun.base] });
                    }
                    None => {
                        out.push(cp);
                        out.push(prep);
                        continue;
                    }
                }
            }
        }
        out.push(cp);
    }
    out
}

fn leading_number(p: &Phrase) -> Option<String> {
    let digits: Vec<&str> = p.units[..p.head]
        .iter()
        .take_while(|u| u.has(WordClass::Num))
        .map(|u| u.text.as_str())
        .collect();
    if digits.is_empty() {
        return None;
    }
    Some(digits.join(" ").replace(',', ""))
}

/// Prepositions a noun attaches beyond of/for, from its `subcat=` annotation.
fn subcategorizes(head: &Phrase, prep: &str) -> bool {
    head.head_unit().attrs.get("subcat").is_some_and(|s| s.split('|').any(|p| p == prep))
}

/// Greedy-nearest attachment, right to left so that `X of Y for Z` nests as
/// `X (of Y (for Z))`.
fn attach_complements(mut cps: Vec<ComplexPhrase>) -> Vec<ComplexPhrase> {
    let mut i = cps.len();
    while i >= 3 {
        i -= 1;
        let (x, p, y) = (i - 2, i - 1, i);
        let prep_ok = cps[p].kind() == PhraseKind::Preposition && cps[p].base.units.len() == 1 && {
            let word = cps[p].base.units[0].lower.as_str();
            word == "of" || word == "for" || subcategorizes(&cps[x].base, word)
        };
        if prep_ok && cps[x].is_nominal() && cps[y].is_nominal() {
            let object = cps.remove(y);
            let prep = cps.remove(p);
            let host = &mut cps[x];
            host.span = host.span.cover(&object.span);
            host.pp_complements.insert(0, PpComplement { preposition: prep.base, object });
            i = x + 1;
        }
    }
    cps
}

fn name_like(cp: &ComplexPhrase) -> bool {
    cp.kind() != PhraseKind::NounGroup || cp.base.head_unit().is_capitalized()
}

fn description_like(cp: &ComplexPhrase) -> bool {
    cp.kind() == PhraseKind::NounGroup && !cp.base.head_unit().is_capitalized()
}

/// `X , Y ,` with Y name-like or X description-like. A conjunction right after
/// the second comma marks a list, which is left for conjunction.
fn attach_appositives(cps: Vec<ComplexPhrase>) -> Vec<ComplexPhrase> {
    let mut cps = cps;
    let mut i = 0;
    while i + 3 < cps.len() {
        let fits = cps[i].is_nominal()
            && cps[i + 1].kind() == PhraseKind::Comma
            && cps[i + 2].is_nominal()
            && cps[i + 3].kind() == PhraseKind::Comma
            && (name_like(&cps[i + 2]) || description_like(&cps[i]))
            && cps.get(i + 4).is_none_or(|n| n.kind() != PhraseKind::Conjunction);
        if fits {
            let mut drained: Vec<ComplexPhrase> = cps.drain(i + 1..i + 4).collect();
            let close = drained.pop().expect("three drained");
            let appositive = drained.pop().expect("three drained");
            let open = drained.pop().expect("three drained");
            let host = &mut cps[i];
            host.absorb(open.base);
            host.absorb(close.base);
            host.span = host.span.cover(&appositive.span);
            host.appositives.push(appositive);
        }
        i += 1;
    }
    cps
}

fn at(cps: &[Option<ComplexPhrase>], j: usize) -> Option<&ComplexPhrase> {
    cps.get(j).and_then(|c| c.as_ref())
}

/// Conjoins runs `X and Y`, `X , Y and Z`, `X , Y , and Z` of one kind into a
/// single flat conjunct list.
fn conjoin(cps: Vec<ComplexPhrase>, eligible: impl Fn(&ComplexPhrase) -> bool) -> Vec<ComplexPhrase> {
    let conj = |c: &ComplexPhrase| is_word(c, PhraseKind::Conjunction, &["and", "or"]);
    let comma = |c: &ComplexPhrase| c.kind() == PhraseKind::Comma;
    let mut out: Vec<ComplexPhrase> = Vec::with_capacity(cps.len());
    let mut i = 0;
    let mut cps: Vec<Option<ComplexPhrase>> = cps.into_iter().map(Some).collect();
        while i < cps.len() {
        let head = at(&cps, i).expect("unconsumed");
        if !eligible(head) {
            out.push(cps[i].take().expect("unconsumed"));
            i += 1;
            continue;
        }
        let kind = head.kind();
        let same = |c: Option<&ComplexPhrase>| c.is_some_and(|c| eligible(c) && c.kind() == kind);
        // Scan for the extent of a list ending in a conjunction.
        let mut members = vec![i];
        let mut links: Vec<Vec<usize>> = Vec::new();
        let mut j = i + 1;
        let mut closed = false;
        loop {
            let a = at(&cps, j);
            let b = at(&cps, j + 1);
            let c = at(&cps, j + 2);
            if a.is_some_and(conj) && same(b) {
                links.push(vec![j]);
                members.push(j + 1);
                closed = true;
                break;
            } else if a.is_some_and(comma) && b.is_some_and(conj) && same(c) {
                links.push(vec![j, j + 1]);
                members.push(j + 2);
                closed = true;
                break;
            } else if a.is_some_and(comma) && same(b) {
                links.push(vec![j]);
                members.push(j + 1);
                j += 2;
            } else {
                break;
            }
        }
        if !closed {
            out.push(cps[i].take().expect("unconsumed"));
            i += 1;
            continue;
        }
        // A closed list may continue: `A and B and C`.
        let mut last = *members.last().expect("non-empty");
        while at(&cps, last + 1).is_some_and(conj) && same(at(&cps, last + 2)) {
            links.push(vec![last + 1]);
            members.push(last + 2);
            last += 2;
        }
        let mut host = cps[i].take().expect("unconsumed");
        for link in links.into_iter().flatten() {
            host.absorb(cps[link].take().expect("unconsumed").base);
        }
        for m in members.into_iter().skip(1) {
            let mut c = cps[m].take().expect("unconsumed");
            host.span = host.span.cover(&c.span);
            let nested = std::mem::take(&mut c.conjuncts);
            host.conjuncts.push(c);
            host.conjuncts.extend(nested);
        }
        out.push(host);
        i = last + 1;
    }
    out
}

/// One line per complex phrase, with attachments indented beneath.
pub fn render_complex_phrases(cps: &[ComplexPhrase]) -> String {
    let mut out = String::new();
    for cp in cps {
        render_one(cp, 0, &mut out);
    }
    out
}

fn render_one(cp: &ComplexPhrase, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    out.push_str(&format!("{pad}{}: {}", cp.kind().label(), cp.base.text));
    if let Some(class) = &cp.equivalence_class {
        out.push_str(&format!(" [{class}]"));
    }
    if let Some(m) = cp.modality.as_ref().filter(|m| **m != Modality::existing() || cp.equivalence_class.is_some()) {
        out.push_str(&format!(" <{m}>"));
    }
    out.push('\n');
    for a in &cp.appositives {
        out.push_str(&format!("{pad}  appositive:\n"));
        render_one(a, depth + 2, out);
    }
    for c in &cp.pp_complements {
        out.push_str(&format!("{pad}  {}:\n", c.word()));
        render_one(&c.object, depth + 2, out);
    }
    if let Some(m) = &cp.measure {
        out.push_str(&format!("{pad}  measure: {} {} per {}\n", m.quantity, m.unit, m.per));
    }
    for c in &cp.conjuncts {
        out.push_str(&format!("{pad}  conjunct:\n"));
        render_one(c, depth + 2, out);
    }
}
