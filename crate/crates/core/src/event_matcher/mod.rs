//! Stage 4: runs compiled patterns over one sentence's complex phrases.
//!
//! Branches live on an explicit breadth-first worklist; each carries its own
//! bindings, so no branch can disturb another. Every accepting branch is
//! recorded, then two filters apply: passive matches subsumed by a larger
//! active match, and matches of a rule family subsumed by a larger match of the
//! same family (typically the same clause found with and without an optional
//! element). [`MatchStats`] counts what each filter removed.

mod fills;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::complex_phraser::{ComplexPhrase, Modality, Seed};
use crate::pattern_compiler::eval::{complement_match, runtime_keys, test_matches, BoundRef, SubPath};
use crate::pattern_compiler::{BindPart, CompiledPatternBase, Guard, Transition, MAX_SKIP, NOT_OTHER};
use crate::phrase_chunker::{PhraseKind, VoiceTag};
use crate::template::TemplateStructure;
use crate::tokenizer::{Span, WordClass};

pub use fills::{build_structure, fill_of};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchBranch {
    pub state: usize,
    /// Index of the next complex phrase to consume.
    pub pos: usize,
    pub start: usize,
    pub bindings: BTreeMap<String, BoundRef>,
    /// Consecutive phrases consumed by skip transitions.
    pub skipped: usize,
    pub date: Option<BoundRef>,
    pub place: Option<BoundRef>,
    /// ActivePassive verb groups resolved by a voice constraint: (phrase, voice).
    pub resolutions: Vec<(usize, VoiceTag)>,
    pub modality: Option<Modality>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub rule: usize,
    pub rule_name: String,
    pub family: String,
    /// Complex-phrase index range consumed.
    pub start: usize,
    pub end: usize,
    pub span: Span,
    pub bindings: BTreeMap<String, BoundRef>,
    pub date: Option<BoundRef>,
    pub place: Option<BoundRef>,
    pub resolutions: Vec<(usize, VoiceTag)>,
    pub modality: Option<Modality>,
    pub subject_missing: bool,
}

impl Match {
    fn fills(&self) -> BTreeSet<(String, BoundRef)> {
        let mut out: BTreeSet<(String, BoundRef)> = self.bindings.iter().map(|(k, v)| (k.clone(), *v)).collect();
        out.extend(self.date.map(|d| ("@date".to_string(), d)));
        out.extend(self.place.map(|p| ("@place".to_string(), p)));
        out
    }

    fn range_contains(&self, other: &Match) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchStats {
    pub accepting_branches: usize,
    pub passive_subsumed: usize,
    pub family_subsumed: usize,
}

fn guard_passes(t: &Transition, cp: &ComplexPhrase, base: &CompiledPatternBase) -> Option<Option<SubPath>> {
    let ok = match &t.guard {
        Guard::Phrase(test) => test_matches(test, cp, &base.classes),
        Guard::Kinds(ks) => ks.contains(&cp.kind()),
        Guard::NotKinds(ks) => !ks.contains(&cp.kind()),
        Guard::TemporalNoun => cp.kind() == PhraseKind::NounGroup && cp.base.head_unit().has(WordClass::Temporal),
    };
    if !ok {
        return None;
    }
    match &t.complement {
        None => Some(None),
        Some(c) => complement_match(c, cp, &base.classes).map(Some),
    }
}

fn is_date_like(cp: &ComplexPhrase) -> bool {
    cp.kind() == PhraseKind::Date || (cp.kind() == PhraseKind::NounGroup && cp.base.head_unit().has(WordClass::Temporal))
}

fn is_place_like(cp: &ComplexPhrase) -> bool {
    cp.coordinated().all(|c| c.kind() == PhraseKind::Location)
}

fn other(cp: &ComplexPhrase) -> bool {
    !NOT_OTHER.contains(&cp.kind())
}

/// Positions reachable from `pos` by `{NG|Other}*`, including `pos`.
fn ng_other_run(phrases: &[ComplexPhrase], pos: usize, limit: usize) -> Vec<usize> {
    let mut out = vec![pos];
    let mut q = pos;
    while q < phrases.len() && q < limit && other(&phrases[q]) {
        q += 1;
        out.push(q);
    }
    out
}

/// The subject-to-verb skip schemata: `{Prep NG}*`; relative-clause skip to
/// the main verb; relative-clause content capture; conjoined verb phrases;
/// reduced-relative skip ending in a comma; and a parenthetical reporting
/// clause (`, a spokesman announced,`). Returns branches positioned after
/// each possible non-empty skip, at most [`MAX_SKIP`] phrases long.
pub fn apply_pseudo_syntax(branch: &MatchBranch, phrases: &[ComplexPhrase]) -> Vec<MatchBranch> {
    let p = branch.pos;
    let limit = (p + MAX_SKIP).min(phrases.len());
    let kind = |q: usize| phrases.get(q).filter(|_| q < limit).map(|c| c.kind());
    let mut ends: BTreeSet<usize> = BTreeSet::new();

    let mut q = p;
    while kind(q) == Some(PhraseKind::Preposition) && kind(q + 1).is_some_and(|k| k.is_nominal()) {
        q += 2;
        ends.insert(q);
    }

    let rel = if kind(p) == Some(PhraseKind::Comma) { p + 1 } else { p };
    if kind(rel) == Some(PhraseKind::RelativePronoun) {
        for a in ng_other_run(phrases, rel + 1, limit) {
            ends.insert(a);
            if kind(a) == Some(PhraseKind::VerbGroup) {
                // Only the whole clause is skipped, so its adjuncts are not
                // read as the main clause's.
                let e = *ng_other_run(phrases, a + 1, limit).last().expect("run includes its start");
                ends.insert(e);
                if kind(e) == Some(PhraseKind::Comma) {
                    ends.insert(e + 1);
                }
            }
        }
    }

    if kind(p) == Some(PhraseKind::Comma) {
        for a in ng_other_run(phrases, p + 1, limit).into_iter().skip(1) {
            if kind(a) == Some(PhraseKind::VerbGroup) && kind(a + 1) == Some(PhraseKind::Comma) {
                ends.insert(a + 2);
            }
        }
    }

    if kind(p) == Some(PhraseKind::VerbGroup) {
        for a in ng_other_run(phrases, p + 1, limit) {
            if kind(a) == Some(PhraseKind::Conjunction) && a < limit {
                ends.insert(a + 1);
            }
        }
        let bare_participle = phrases[p]
            .base
            .verb
            .as_ref()
            .is_some_and(|f| f.auxiliaries.is_empty() && matches!(f.voice_tag, VoiceTag::ActivePassive | VoiceTag::Passive));
        if bare_participle {
            for a in ng_other_run(phrases, p + 1, limit) {
                if a > p + 1 && kind(a - 1) == Some(PhraseKind::Comma) {
                    ends.insert(a);
                }
            }
        }
    }
    ends.into_iter()
        .filter(|&e| e > p && e <= limit)
        .map(|e| MatchBranch { pos: e, skipped: 0, ..branch.clone() })
        .collect()
}

fn subject_missing(base: &CompiledPatternBase, rule: usize, bindings: &BTreeMap<String, BoundRef>) -> bool {
    let r = &base.rules[rule];
    r.has_verb() && r.subject.as_ref().is_none_or(|s| !bindings.contains_key(s))
}

/// Every accepting branch over the sentence, before filtering.
pub fn accepting_branches(phrases: &[ComplexPhrase], base: &CompiledPatternBase) -> Vec<Match> {
    let triggered: Vec<HashSet<usize>> = phrases
        .iter()
        .map(|cp| {
            runtime_keys(cp)
                .iter()
                .filter_map(|k| base.index.get(k))
                .flatten()
                .copied()
                .collect()
        })
        .collect();
    let mut matches = Vec::new();
    let mut seen_matches: HashSet<MatchKey> = HashSet::new();
    for start in 0..phrases.len() {
        let mut visited: HashSet<MatchBranch> = HashSet::new();
        let mut work: VecDeque<MatchBranch> = base
            .starts
            .iter()
            .map(|&s| MatchBranch {
                state: s,
                pos: start,
                start,
                bindings: BTreeMap::new(),
                skipped: 0,
                date: None,
                place: None,
                resolutions: Vec::new(),
                modality: None,
            })
            .collect();
        while let Some(branch) = work.pop_front() {
            if !visited.insert(branch.clone()) {
                continue;
            }
            for &s in &base.closures[branch.state] {
                let state = &base.states[s];
                if let Some(rule) = state.accept {
                    if branch.pos > start {
                        record(&mut matches, &mut seen_matches, base, rule, &branch, phrases);
                    }
                }
                if state.pseudo_syntax {
                    for mut b in apply_pseudo_syntax(&branch, phrases) {
                        b.state = state.eps[0];
                        work.push_back(b);
                    }
                }
                let Some(cp) = phrases.get(branch.pos) else { continue };
                for &tid in &state.out {
                    if !triggered[branch.pos].contains(&tid) {
                        continue;
                    }
                    let t = &base.transitions[tid];
                    let Some(sub) = guard_passes(t, cp, base) else { continue };
                    if let Some(next) = advance(&branch, t, sub, cp) {
                        work.push_back(next);
                    }
                }
            }
        }
    }
    matches
}

fn advance(
    branch: &MatchBranch,
    t: &Transition,
    sub: Option<SubPath>,
    cp: &ComplexPhrase,
) -> Option<MatchBranch> {
    let mut b = branch.clone();
    b.state = t.to;
    b.pos += 1;
    if t.skip {
        b.skipped += 1;
        if b.skipped > MAX_SKIP {
            return None;
        }
        if t.capture {
            let here = BoundRef { phrase: branch.pos, path: SubPath::Whole, part: BindPart::Whole };
            if b.date.is_none() && is_date_like(cp) {
                b.date = Some(here);
            } else if b.place.is_none() && is_place_like(cp) {
                b.place = Some(here);
            }
        }
        return Some(b);
    }
    b.skipped = 0;
    if let Some(binding) = &t.binding {
        b.bindings.insert(binding.name.clone(), BoundRef { phrase: branch.pos, path: SubPath::Whole, part: binding.part });
    }
    if let (Some(c), Some(path)) = (&t.complement, sub) {
        if let Some(binding) = &c.binding {
            b.bindings.insert(binding.name.clone(), BoundRef { phrase: branch.pos, path, part: binding.part });
        }
    }
    if let Guard::Phrase(test) = &t.guard {
        if cp.kind() == PhraseKind::VerbGroup && test.is_verbal() {
            if let (Some(vc), Some(VoiceTag::ActivePassive)) = (test.options.voice, cp.voice()) {
                let resolved = match vc {
                    crate::pattern_compiler::VoiceConstraint::Passive => VoiceTag::Passive,
                    _ => VoiceTag::Active,
                };
                b.resolutions.push((branch.pos, resolved));
            }
            if b.modality.is_none() && test.class.is_some() {
                b.modality = cp.modality.clone();
            }
        }
    }
    Some(b)
}

type MatchKey = (usize, usize, usize, Vec<(String, BoundRef)>, Option<BoundRef>, Option<BoundRef>);

fn record(
    matches: &mut Vec<Match>,
    seen: &mut HashSet<MatchKey>,
    base: &CompiledPatternBase,
    rule: usize,
    b: &MatchBranch,
    phrases: &[ComplexPhrase],
) {
    let r = &base.rules[rule];
    if let Some(filter) = &r.modality_filter {
        if b.modality.as_ref().map(|m| m.0.as_str()) != Some(filter.as_str()) {
            return;
        }
    }
    let key = (rule, b.start, b.pos, b.bindings.iter().map(|(k, v)| (k.clone(), *v)).collect(), b.date, b.place);
    if !seen.insert(key) {
        return;
    }
    let span = phrases[b.start..b.pos].iter().map(|c| c.span).reduce(|a, c| a.cover(&c)).expect("non-empty match");
    matches.push(Match {
        rule,
        rule_name: r.name.clone(),
        family: r.family.clone(),
        start: b.start,
        end: b.pos,
        span,
        bindings: b.bindings.clone(),
        date: b.date,
        place: b.place,
        resolutions: b.resolutions.clone(),
        modality: b.modality.clone(),
        subject_missing: subject_missing(base, rule, &b.bindings),
    });
}

/// Same range and bindings, but adjuncts captured from different phrases
/// (a skip may pass over the first of several). More captures win, then
/// earlier ones.
fn same_clause_better_adjuncts(n: &Match, m: &Match) -> bool {
    let rank = |x: &Match| {
        let at = |b: Option<BoundRef>| b.map_or(usize::MAX, |b| b.phrase);
        (x.date.is_none() as u8 + x.place.is_none() as u8, at(x.date), at(x.place))
    };
    (n.start, n.end) == (m.start, m.end) && n.bindings == m.bindings && rank(n) < rank(m)
}

/// Applies passive subsumption and same-family subsumption.
pub fn filter_matches(matches: Vec<Match>, base: &CompiledPatternBase) -> (Vec<Match>, MatchStats) {
    let mut stats = MatchStats { accepting_branches: matches.len(), ..MatchStats::default() };
    let is_passive = |m: &Match| base.rules[m.rule].variant.is_some_and(|v| v.is_passive());
    let is_active = |m: &Match| base.rules[m.rule].variant.is_some_and(|v| !v.is_passive());
    let fills: Vec<BTreeSet<(String, BoundRef)>> = matches.iter().map(Match::fills).collect();
    let bindings_superset = |a: &Match, b: &Match| b.bindings.iter().all(|(k, v)| a.bindings.get(k) == Some(v));

    let mut keep = vec![true; matches.len()];
    for (i, m) in matches.iter().enumerate() {
        if !is_passive(m) {
            continue;
        }
        // The larger active clause either covers the passive's bindings or read
        // one of its ambiguous verb groups the other way.
        let reread = |a: &Match| m.resolutions.iter().any(|(p, v)| a.resolutions.iter().any(|(q, w)| p == q && v != w));
        let subsumed = matches.iter().any(|a| {
            is_active(a)
                && a.range_contains(m)
                && (a.start, a.end) != (m.start, m.end)
                && (bindings_superset(a, m) || reread(a))
        });
        if subsumed {
            keep[i] = false;
            stats.passive_subsumed += 1;
        }
    }
    for i in 0..matches.len() {
        if !keep[i] {
            continue;
        }
        let m = &matches[i];
        let dominated = (0..matches.len()).any(|j| {
            let n = &matches[j];
            j != i
                && keep[j]
                && n.family == m.family
                && n.range_contains(m)
                && ((fills[i].is_subset(&fills[j])
                    && ((n.start, n.end) != (m.start, m.end) || fills[i] != fills[j] || j < i))
                    || same_clause_better_adjuncts(n, m))
        });
        if dominated {
            keep[i] = false;
            stats.family_subsumed += 1;
        }
    }
    let kept = matches.into_iter().zip(keep).filter_map(|(m, k)| k.then_some(m)).collect();
    (kept, stats)
}

/// Matches after filtering, in (start, rule) order.
pub fn find_matches(phrases: &[ComplexPhrase], base: &CompiledPatternBase) -> (Vec<Match>, MatchStats) {
    let (mut kept, stats) = filter_matches(accepting_branches(phrases, base), base);
    kept.sort_by_key(|m| (m.start, m.rule, m.end));
    (kept, stats)
}

pub fn match_sentence(phrases: &[ComplexPhrase], base: &CompiledPatternBase, sentence: usize) -> Vec<TemplateStructure> {
    let (matches, _) = find_matches(phrases, base);
    matches.iter().map(|m| build_structure(m, base, phrases, sentence)).collect()
}

/// Stage 4 with seed augmentation: a match binding a phrase that carries an
/// unconsumed seed of the same template type absorbs the seed's fills.
/// Returns the structures and the seeds left unconsumed.
pub fn match_with_seeds(
    phrases: &[ComplexPhrase],
    base: &CompiledPatternBase,
    sentence: usize,
    seeds: Vec<Seed>,
) -> (Vec<TemplateStructure>, Vec<Seed>, Vec<Match>, MatchStats) {
    let (matches, stats) = find_matches(phrases, base);
    let mut seeds: Vec<Option<Seed>> = seeds.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(matches.len());
    for m in &matches {
        let mut s = build_structure(m, base, phrases, sentence);
        let anchors: BTreeSet<usize> = m.bindings.values().filter(|b| b.path == SubPath::Whole).map(|b| b.phrase).collect();
        for slot in seeds.iter_mut() {
            let hit = slot
                .as_ref()
                .is_some_and(|seed| anchors.contains(&seed.anchor) && seed.structure.template_type == s.template_type);
            if hit {
                let seed = slot.take().expect("checked");
                for (k, v) in seed.structure.slots {
                    s.slots.entry(k).or_insert(v);
                }
                s.provenance.extend(seed.structure.provenance);
            }
        }
        out.push(s);
    }
    (out, seeds.into_iter().flatten().collect(), matches, stats)
}

#[cfg(test)]
mod tests;
