//! Evaluation of phrase tests against complex phrases, and the head-word/kind
//! keys used to index transitions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ast::{
    BindPart, ClassDomain, Complement, DomainClass, DomainClasses, PhraseTest, VgOptions, VoiceConstraint,
};
use crate::complex_phraser::ComplexPhrase;
use crate::phrase_chunker::{Phrase, PhraseKind, VoiceTag};

/// Where inside a complex phrase a binding points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubPath {
    Whole,
    Appositive(usize),
    Complement(usize),
}

/// A bound value: complex phrase `phrase` of the sentence, narrowed by `path`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundRef {
    pub phrase: usize,
    pub path: SubPath,
    pub part: BindPart,
}

impl BoundRef {
    pub fn resolve<'a>(&self, cps: &'a [ComplexPhrase]) -> &'a ComplexPhrase {
        let cp = &cps[self.phrase];
        match self.path {
            SubPath::Whole => cp,
            SubPath::Appositive(i) => &cp.appositives[i],
            SubPath::Complement(i) => &cp.pp_complements[i].object,
        }
    }
}

pub fn voice_key(voice: VoiceTag) -> &'static str {
    match voice {
        VoiceTag::Active => "ActiveVerbGroup",
        VoiceTag::Passive => "PassiveVerbGroup",
        VoiceTag::ActivePassive => "ActivePassiveVerbGroup",
        VoiceTag::Gerund => "GerundVerbGroup",
        VoiceTag::Infinitive => "InfinitiveVerbGroup",
    }
}

const VOICES: [VoiceTag; 5] =
    [VoiceTag::Active, VoiceTag::Passive, VoiceTag::ActivePassive, VoiceTag::Gerund, VoiceTag::Infinitive];

fn class_has_phrase(class: &DomainClass, p: &Phrase, nominal_form: bool) -> bool {
    let head = p.head_unit();
    if nominal_form {
        return p.kind.is_nominal() && class.nominal.iter().any(|w| *w == head.lemma || *w == head.lower);
    }
    match class.domain {
        ClassDomain::Verb => p.kind == PhraseKind::VerbGroup && class_word(class, head.head_word(), &head.lower),
        ClassDomain::Noun => {
            p.kind.is_nominal()
                && (class.any
                    || class.kinds.contains(&p.kind)
                    || class.word_classes.iter().any(|c| head.has(*c))
                    || class_word(class, &head.lemma, &head.lower)
                    || class_word(class, last_word(&head.lemma), last_word(&head.lower)))
        }
    }
}

/// `trading house` → `house`: a multiword noun belongs to its final word's classes.
fn last_word(s: &str) -> &str {
    s.rsplit(' ').next().unwrap_or(s)
}

fn class_word(class: &DomainClass, lemma: &str, lower: &str) -> bool {
    class.words.iter().any(|w| w == lemma || w == lower)
}

fn options_hold(o: &VgOptions, p: &Phrase, voice: Option<VoiceTag>) -> bool {
    if o.is_empty() {
        return true;
    }
    let Some(f) = &p.verb else { return false };
    let voice = voice.unwrap_or(f.voice_tag);
    o.voice.is_none_or(|v: VoiceConstraint| v.admits(voice))
        && (!o.bare || f.auxiliaries.is_empty())
        && o.be_to.is_none_or(|b| b == f.be_to)
        && (!o.copula || f.copula)
        && (!o.adjective || f.is_predicate_adjective)
        && o.aux.as_ref().is_none_or(|a| f.auxiliaries.iter().any(|x| x == a))
}

/// Test against one complex phrase without looking at conjuncts.
fn single(test: &PhraseTest, cp: &ComplexPhrase, classes: &DomainClasses) -> bool {
    if !test.kind.admits(cp.kind()) {
        return false;
    }
    if !test.literals.is_empty() && !test.literals.iter().any(|l| *l == cp.base.text.to_lowercase()) {
        return false;
    }
    let voice = if cp.kind() == PhraseKind::VerbGroup { cp.voice() } else { None };
    if !options_hold(&test.options, &cp.base, voice) {
        return false;
    }
    let Some(name) = &test.class else { return true };
    let Some(class) = classes.get(name) else { return false };
    match class.domain {
        ClassDomain::Verb if !test.nominal_form => {
            cp.equivalence_class.as_deref() == Some(name.as_str()) || class_has_phrase(class, &cp.base, false)
        }
        _ => {
            class_has_phrase(class, &cp.base, test.nominal_form)
                || cp.appositives.iter().any(|a| class_has_phrase(class, &a.base, test.nominal_form))
        }
    }
}

/// Whether `test` accepts `cp`. Verb groups pass when any conjunct passes;
/// conjoined noun groups need a plural test and every conjunct passing.
pub fn test_matches(test: &PhraseTest, cp: &ComplexPhrase, classes: &DomainClasses) -> bool {
    if cp.conjuncts.is_empty() {
        return single(test, cp, classes);
    }
    if cp.kind() == PhraseKind::VerbGroup {
        return cp.coordinated().any(|c| single(test, c, classes));
    }
    test.plural && cp.coordinated().all(|c| single(test, c, classes))
}

/// First attached sub-phrase satisfying a complement test.
pub fn complement_match(c: &Complement, cp: &ComplexPhrase, classes: &DomainClasses) -> Option<SubPath> {
    if c.relation == "appos" {
        return cp.appositives.iter().position(|a| test_matches(&c.test, a, classes)).map(SubPath::Appositive);
    }
    cp.pp_complements
        .iter()
        .position(|pp| (c.relation == "any" || pp.word() == c.relation) && test_matches(&c.test, &pp.object, classes))
        .map(SubPath::Complement)
}

/// Kind keys a phrase kind contributes: verb groups are split by voice.
fn kind_keys_of(cp: &ComplexPhrase) -> Vec<&'static str> {
    if cp.kind() == PhraseKind::VerbGroup {
        cp.coordinated().filter_map(|c| c.voice()).map(voice_key).collect()
    } else {
        vec![cp.kind().ident()]
    }
}

/// Lookup keys of a complex phrase at run time.
pub fn runtime_keys(cp: &ComplexPhrase) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    let mut add_heads = |c: &ComplexPhrase, kinds: &[&'static str]| {
        let head = c.base.head_unit();
        let mut heads = vec!["*".to_string(), head.head_word().to_string(), head.lemma.clone(), c.base.text.to_lowercase()];
        heads.push(last_word(&head.lemma).to_string());
        heads.extend(head.classes.iter().map(|w| format!("%{}", w.label())));
        if let Some(eq) = &c.equivalence_class {
            heads.push(format!("@{eq}"));
        }
        for h in heads {
            for k in kinds {
                out.insert((h.clone(), k.to_string()));
            }
        }
    };
    for c in cp.coordinated() {
        let kinds = kind_keys_of(c);
        add_heads(c, &kinds);
        for a in &c.appositives {
            let kinds = kind_keys_of(a);
            add_heads(a, &kinds);
        }
    }
    out
}

/// Index keys a test is filed under. Every phrase passing the test carries at
/// least one of them among its [`runtime_keys`].
pub fn test_keys(test: &PhraseTest, classes: &DomainClasses) -> BTreeSet<(String, String)> {
    let mut kinds: Vec<&'static str> = Vec::new();
    let mut verbal = false;
    for k in test.kind.kinds() {
        if k == PhraseKind::VerbGroup {
            verbal = true;
            for v in VOICES {
                if test.options.voice.is_none_or(|c| c.admits(v)) {
                    kinds.push(voice_key(v));
                }
            }
        } else {
            kinds.push(k.ident());
        }
    }
    let mut heads: Vec<(String, Option<&'static str>)> = Vec::new();
    if !test.literals.is_empty() {
        heads.extend(test.literals.iter().map(|l| (l.clone(), None)));
    } else if let Some(class) = test.class.as_ref().and_then(|c| classes.get(c)) {
        if test.nominal_form {
            heads.extend(class.nominal.iter().map(|w| (w.clone(), None)));
        } else if class.any {
            heads.push(("*".into(), None));
        } else {
            heads.extend(class.words.iter().map(|w| (w.clone(), None)));
            heads.extend(class.word_classes.iter().map(|w| (format!("%{}", w.label()), None)));
            heads.extend(class.kinds.iter().map(|k| ("*".to_string(), Some(k.ident()))));
            if verbal && class.domain == ClassDomain::Verb {
                heads.push((format!("@{}", class.name), None));
            }
        }
    } else if test.class.is_some() {
        // Undeclared classes are rejected at parse time; index nothing.
    } else {
        heads.push(("*".into(), None));
    }
    let mut out = BTreeSet::new();
    for (h, only) in heads {
        match only {
            Some(k) => {
                if kinds.contains(&k) {
                    out.insert((h, k.to_string()));
                }
            }
            None => {
                for k in &kinds {
                    out.insert((h.clone(), k.to_string()));
                }
            }
        }
    }
    out
}

/// Convenience for tests and rule audits: does any test key occur among the
/// phrase's runtime keys?
pub fn keys_intersect(test: &PhraseTest, cp: &ComplexPhrase, classes: &DomainClasses) -> bool {
    let rk = runtime_keys(cp);
    test_keys(test, classes).iter().any(|k| rk.contains(k))
}
