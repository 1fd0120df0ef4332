use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::eval::{test_keys, voice_key};
use super::printer::{print_action, print_elements};
use super::CompileError;
use crate::phrase_chunker::{PhraseKind, VoiceTag};

/// What a transition consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Guard {
    Phrase(PhraseTest),
    Kinds(Vec<PhraseKind>),
    /// Any phrase whose kind is not listed.
    NotKinds(Vec<PhraseKind>),
    /// A noun group headed by a temporal noun ("yesterday", "last year").
    TemporalNoun,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub guard: Guard,
    pub binding: Option<Binding>,
    pub complement: Option<Complement>,
    /// Part of a skip: counts toward the skip bound and binds nothing.
    pub skip: bool,
    /// Skipped dates and locations are recorded for `@date`/`@place`.
    pub capture: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub eps: Vec<usize>,
    pub out: Vec<usize>,
    /// Index into `rules` of the rule this state accepts for.
    pub accept: Option<usize>,
    /// Entering this state triggers the subject-to-verb skip schemata.
    pub pseudo_syntax: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledPatternBase {
    pub rules: Vec<PatternRule>,
    pub states: Vec<State>,
    pub transitions: Vec<Transition>,
    /// Start state per rule.
    pub starts: Vec<usize>,
    /// (head word, phrase kind) → transitions filed under that pair.
    pub index: BTreeMap<(String, String), Vec<usize>>,
    pub classes: DomainClasses,
    /// Epsilon closure of each state, sorted.
    pub closures: Vec<Vec<usize>>,
}

fn all_kind_keys(kinds: &[PhraseKind]) -> Vec<String> {
    let mut out = Vec::new();
    for k in kinds {
        if *k == PhraseKind::VerbGroup {
            for v in [VoiceTag::Active, VoiceTag::Passive, VoiceTag::ActivePassive, VoiceTag::Gerund, VoiceTag::Infinitive] {
                out.push(voice_key(v).to_string());
            }
        } else {
            out.push(k.ident().to_string());
        }
    }
    out
}

fn guard_keys(g: &Guard, classes: &DomainClasses) -> BTreeSet<(String, String)> {
    match g {
        Guard::Phrase(t) => test_keys(t, classes),
        Guard::Kinds(ks) => all_kind_keys(ks).into_iter().map(|k| ("*".to_string(), k)).collect(),
        Guard::NotKinds(ks) => {
            let admitted: Vec<PhraseKind> = PhraseKind::ALL.iter().copied().filter(|k| !ks.contains(k)).collect();
            all_kind_keys(&admitted).into_iter().map(|k| ("*".to_string(), k)).collect()
        }
        Guard::TemporalNoun => [("%temporal".to_string(), PhraseKind::NounGroup.ident().to_string())].into(),
    }
}

/// Kinds outside "Other" in the `{NounGroup | Other}*` schema.
pub const NOT_OTHER: [PhraseKind; 3] = [PhraseKind::VerbGroup, PhraseKind::Conjunction, PhraseKind::RelativePronoun];

struct Builder<'a> {
    states: Vec<State>,
    transitions: Vec<Transition>,
    classes: &'a DomainClasses,
    capture: bool,
}

impl Builder<'_> {
    fn state(&mut self) -> usize {
        self.states.push(State::default());
        self.states.len() - 1
    }

    fn eps(&mut self, from: usize, to: usize) {
        self.states[from].eps.push(to);
    }

    fn edge(&mut self, from: usize, to: usize, guard: Guard, skip: bool) -> usize {
        self.transitions.push(Transition {
            from,
            to,
            guard,
            binding: None,
            complement: None,
            skip,
            capture: skip && self.capture,
        });
        let id = self.transitions.len() - 1;
        self.states[from].out.push(id);
        id
    }

    /// Builds `elements` from `start`; returns the end state.
    fn sequence(&mut self, start: usize, elements: &[PatternElement]) -> usize {
        let mut cur = start;
        for e in elements {
            cur = self.element(cur, e);
        }
        cur
    }

    fn element(&mut self, from: usize, e: &PatternElement) -> usize {
        let to = self.state();
        match e {
            PatternElement::Constraint(c) => {
                let id = self.edge(from, to, Guard::Phrase(c.test.clone()), false);
                self.transitions[id].binding = c.binding.clone();
                self.transitions[id].complement = c.complement.clone();
                if c.optional {
                    self.eps(from, to);
                }
            }
            PatternElement::Literal { words, optional } => {
                let mut t = PhraseTest::kind(KindTest::Any);
                t.literals = words.clone();
                self.edge(from, to, Guard::Phrase(t), false);
                if *optional {
                    self.eps(from, to);
                }
            }
            PatternElement::Group { alternatives, optional } => {
                for alt in alternatives {
                    let s = self.state();
                    self.eps(from, s);
                    let end = self.sequence(s, alt);
                    self.eps(end, to);
                }
                if *optional {
                    self.eps(from, to);
                }
            }
            PatternElement::PseudoSyntax => {
                self.states[from].pseudo_syntax = true;
                self.eps(from, to);
            }
            PatternElement::Skip(schema) => self.skip(from, to, *schema),
        }
        to
    }

    fn skip(&mut self, from: usize, to: usize, schema: SkipSchema) {
        let lp = self.state();
        self.eps(from, lp);
        self.eps(lp, to);
        let prep_ng = |b: &mut Self| {
            let p = b.state();
            b.edge(lp, p, Guard::Kinds(vec![PhraseKind::Preposition]), true);
            // Skipped noun groups may be coordinated ("in California and Tennessee").
            let ng = PhraseTest { plural: true, ..PhraseTest::kind(KindTest::Nominal) };
            b.edge(p, lp, Guard::Phrase(ng), true);
        };
        match schema {
            SkipSchema::Adjunct => {
                self.edge(lp, lp, Guard::Kinds(vec![PhraseKind::Date, PhraseKind::Time, PhraseKind::Location]), true);
                self.edge(lp, lp, Guard::TemporalNoun, true);
                prep_ng(self);
                let open = self.state();
                let inside = self.state();
                self.edge(lp, open, Guard::Kinds(vec![PhraseKind::Comma]), true);
                // Dates and places inside the parenthetical belong to it.
                for (a, b) in [(open, inside), (inside, inside)] {
                    let t = self.edge(a, b, Guard::NotKinds(vec![PhraseKind::Comma]), true);
                    self.transitions[t].capture = false;
                }
                self.edge(inside, lp, Guard::Kinds(vec![PhraseKind::Comma]), true);
            }
            SkipSchema::PrepNg => prep_ng(self),
            SkipSchema::NgOther => {
                self.edge(lp, lp, Guard::NotKinds(NOT_OTHER.to_vec()), true);
            }
        }
    }
}

fn closure_of(states: &[State], s: usize) -> Vec<usize> {
    let mut seen = BTreeSet::from([s]);
    let mut stack = vec![s];
    while let Some(x) = stack.pop() {
        for &y in &states[x].eps {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

fn check_classes(rule: &PatternRule, classes: &DomainClasses) -> Result<(), CompileError> {
    fn tests(es: &[PatternElement], out: &mut Vec<PhraseTest>) {
        for e in es {
            match e {
                PatternElement::Constraint(c) => {
                    out.push(c.test.clone());
                    if let Some(x) = &c.complement {
                        out.push(x.test.clone());
                    }
                }
                PatternElement::Group { alternatives, .. } => alternatives.iter().for_each(|a| tests(a, out)),
                _ => {}
            }
        }
    }
    let mut ts = Vec::new();
    tests(&rule.elements, &mut ts);
    for t in ts {
        if let Some(c) = &t.class {
            if classes.get(c).is_none() {
                return Err(CompileError::UnknownClass { rule: rule.name.clone(), class: c.clone() });
            }
        }
    }
    Ok(())
}

/// Builds transition tables for fully expanded rules.
pub fn compile(rules: &[PatternRule], classes: &DomainClasses) -> Result<CompiledPatternBase, CompileError> {
    let mut names = BTreeSet::new();
    for r in rules {
        if !names.insert(r.name.as_str()) {
            return Err(CompileError::DuplicateName(r.name.clone()));
        }
        check_classes(r, classes)?;
    }
    let mut b = Builder { states: Vec::new(), transitions: Vec::new(), classes, capture: false };
    let mut starts = Vec::with_capacity(rules.len());
    for (i, r) in rules.iter().enumerate() {
        b.capture = r.action.uses(&Term::Date) || r.action.uses(&Term::Place);
        let start = b.state();
        let end = b.sequence(start, &r.elements);
        b.states[end].accept = Some(i);
        starts.push(start);
    }
    let mut index: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (id, t) in b.transitions.iter().enumerate() {
        for key in guard_keys(&t.guard, b.classes) {
            index.entry(key).or_default().push(id);
        }
    }
    let closures = (0..b.states.len()).map(|s| closure_of(&b.states, s)).collect();
    Ok(CompiledPatternBase {
        rules: rules.to_vec(),
        states: b.states,
        transitions: b.transitions,
        starts,
        index,
        classes: classes.clone(),
        closures,
    })
}

impl CompiledPatternBase {
    pub fn empty() -> Self {
        compile(&[], &DomainClasses::default()).expect("empty base")
    }

    /// Deterministic text export of rules, tables and index.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        writeln!(out, "rules {}", self.rules.len()).unwrap();
        for (i, r) in self.rules.iter().enumerate() {
            writeln!(out, "rule {i} {} family={} start={}", r.name, r.family, self.starts[i]).unwrap();
            writeln!(out, "  {}", print_elements(&r.elements)).unwrap();
            writeln!(out, "  => {}", print_action(&r.action)).unwrap();
        }
        writeln!(out, "states {}", self.states.len()).unwrap();
        for (i, s) in self.states.iter().enumerate() {
            let accept = s.accept.map_or(String::new(), |a| format!(" accept={a}"));
            let ps = if s.pseudo_syntax { " pseudo" } else { "" };
            writeln!(out, "state {i} eps={:?} out={:?}{accept}{ps}", s.eps, s.out).unwrap();
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let guard = match &t.guard {
                Guard::Phrase(p) => super::printer::print_test(p),
                Guard::Kinds(ks) => format!("kinds{:?}", ks),
                Guard::NotKinds(ks) => format!("notkinds{:?}", ks),
                Guard::TemporalNoun => "temporal".into(),
            };
            let bind = t.binding.as_ref().map_or(String::new(), |b| format!(" bind={}", b.name));
            writeln!(out, "trans {i} {}->{} {guard}{bind} skip={} capture={}", t.from, t.to, t.skip, t.capture).unwrap();
        }
        for ((h, k), ids) in &self.index {
            writeln!(out, "index {h}-{k} {ids:?}").unwrap();
        }
        out
    }

    /// Expanded rule inventory, one rule per block, for auditing.
    pub fn inventory(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            writeln!(out, "{} [{}]", r.name, r.variant.map_or("as written", |v| v.suffix())).unwrap();
            writeln!(out, "    {}", print_elements(&r.elements)).unwrap();
            writeln!(out, "    => {}", print_action(&r.action)).unwrap();
        }
        out
    }

    /// Index keys, rendered `head-Kind`.
    pub fn index_keys(&self) -> Vec<String> {
        self.index.keys().map(|(h, k)| format!("{h}-{k}")).collect()
    }
}
