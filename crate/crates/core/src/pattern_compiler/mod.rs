//! The declarative rule language: parsing, printing, compile-time expansion,
//! and compilation to head-word-indexed transition tables.
//!
//! A rule file is a sequence of `[SECTION]` blocks: PHRASES, TEMPLATES,
//! CLASSES, VERBGROUPS, ENTITIES, SEEDS, PATTERNS and MERGE.

pub mod ast;
mod compile;
pub mod eval;
mod expand;
mod parser;
pub mod printer;

use crate::merger::MergeConfig;
use crate::phrase_chunker::{PhraseGrammar, PhraseKind};
use crate::rulefile::LineError;
use crate::template::TemplateSchema;

pub use ast::*;
pub use compile::{compile, CompiledPatternBase, Guard, State, Transition, NOT_OTHER};
pub use expand::{expand_transformations, insert_adjunct_tolerance, insert_pseudo_syntax};
pub use parser::{parse_elements, parse_rules};
pub use printer::print_rules;

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    /// Empty when the file declares no PHRASES section.
    pub phrases: PhraseGrammar,
    pub templates: TemplateSchema,
    pub classes: DomainClasses,
    pub verb_groups: Vec<EquivalenceRule>,
    pub entities: Vec<EntityRule>,
    pub seeds: Vec<PatternRule>,
    pub patterns: Vec<PatternRule>,
    pub merge: MergeConfig,
}

impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        self.phrases.statements == other.phrases.statements
            && self.templates == other.templates
            && self.classes == other.classes
            && self.verb_groups == other.verb_groups
            && self.entities == other.entities
            && self.seeds == other.seeds
            && self.patterns == other.patterns
            && self.merge == other.merge
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("rule `{rule}`: expand needs a Subject VerbGroup Object pattern")]
    NotSvo { rule: String },
    #[error("duplicate rule name `{0}` after expansion")]
    DuplicateName(String),
    #[error("rule `{rule}` references undeclared class `{class}`")]
    UnknownClass { rule: String, class: String },
    #[error(transparent)]
    Parse(#[from] LineError),
}

impl RuleSet {
    /// Gives every `<Class>` test the kind its class's domain implies, then
    /// recomputes each rule's leading subject.
    pub(crate) fn resolve_class_kinds(&mut self) {
        let classes = &self.classes;
        for r in self.seeds.iter_mut().chain(self.patterns.iter_mut()) {
            resolve_elements(&mut r.elements, classes);
            if r.variant.is_none() {
                r.subject = leading_subject(&r.elements);
            }
        }
        for v in &mut self.verb_groups {
            resolve_elements(&mut v.elements, classes);
        }
        for e in &mut self.entities {
            e.tests.iter_mut().for_each(|t| resolve_test(t, classes));
        }
    }

    /// Class references, template types and slot names must all be declared.
    pub(crate) fn check_references(&self) -> Result<(), LineError> {
        let rules = self.seeds.iter().chain(&self.patterns);
        for r in rules {
            let ctx = format!("rule `{}`", r.name);
            for name in class_refs(&r.elements) {
                if self.classes.get(&name).is_none() {
                    return Err(LineError::new(r.line, format!("{ctx}: undeclared class `{name}`")));
                }
            }
            if !self.templates.types.is_empty() {
                let slots = self.templates.slots(&r.action.template_type).ok_or_else(|| {
                    LineError::new(r.line, format!("{ctx}: undeclared template type `{}`", r.action.template_type))
                })?;
                for (slot, _) in &r.action.slots {
                    if !slots.contains(slot) {
                        return Err(LineError::new(r.line, format!("{ctx}: template has no slot `{slot}`")));
                    }
                }
            }
        }
        for v in &self.verb_groups {
            let is_vg = |e: Option<&PatternElement>| {
                e.and_then(PatternElement::constraint).is_some_and(|c| c.test.is_verbal() && !c.optional)
            };
            if !(is_vg(v.elements.first()) && is_vg(v.elements.last())) {
                let msg = format!("verb-group rule `{}`: must start and end with a verb group", v.class);
                return Err(LineError::new(v.line, msg));
            }
            for name in class_refs(&v.elements) {
                if self.classes.get(&name).is_none() {
                    return Err(LineError::new(v.line, format!("verb-group rule `{}`: undeclared class `{name}`", v.class)));
                }
            }
        }
        for e in &self.entities {
            for name in e.tests.iter().filter_map(|t| t.class.clone()) {
                if self.classes.get(&name).is_none() {
                    return Err(LineError::new(e.line, format!("entity rule `{}`: undeclared class `{name}`", e.entity_type)));
                }
            }
        }
        Ok(())
    }

    /// Expansion, pseudo-syntax and adjunct insertion for every pattern.
    pub fn prepared_patterns(&self) -> Result<Vec<PatternRule>, CompileError> {
        let mut out = Vec::new();
        for r in &self.patterns {
            for v in expand_transformations(r, &self.classes)? {
                out.push(insert_adjunct_tolerance(&insert_pseudo_syntax(&v)));
            }
        }
        Ok(out)
    }

    pub fn compile_patterns(&self) -> Result<CompiledPatternBase, CompileError> {
        compile(&self.prepared_patterns()?, &self.classes)
    }

    /// Seeds match contiguous complex phrases; no skips are inserted.
    pub fn compile_seeds(&self) -> Result<CompiledPatternBase, CompileError> {
        compile(&self.seeds, &self.classes)
    }

    /// Combines several rule files; later files add to earlier ones.
    pub fn merge_from(&mut self, other: RuleSet) -> Result<(), CompileError> {
        for s in other.phrases.statements {
            let line = [(0usize, s.as_str())];
            self.phrases.extend(&line)?;
        }
        for (ty, slots) in other.templates.types {
            self.templates.types.insert(ty, slots);
        }
        for (name, class) in other.classes.classes {
            self.classes.classes.insert(name, class);
        }
        self.verb_groups.extend(other.verb_groups);
        self.entities.extend(other.entities);
        for r in other.seeds.iter().chain(&other.patterns) {
            if self.seeds.iter().chain(&self.patterns).any(|x| x.name == r.name) {
                return Err(CompileError::DuplicateName(r.name.clone()));
            }
        }
        self.seeds.extend(other.seeds);
        self.patterns.extend(other.patterns);
        let m = other.merge;
        self.merge.vague.extend(m.vague);
        self.merge.hierarchy.extend(m.hierarchy);
        self.merge.name_overlap.extend(m.name_overlap);
        self.merge.exact.extend(m.exact);
        self.merge.links.extend(m.links);
        self.merge.max_distance = self.merge.max_distance.or(m.max_distance);
        self.resolve_class_kinds();
        Ok(())
    }
}

fn resolve_test(t: &mut PhraseTest, classes: &DomainClasses) {
    if t.bracket && t.kind == KindTest::Any {
        if let Some(c) = t.class.as_ref().and_then(|c| classes.get(c)) {
            t.kind = match c.domain {
                ClassDomain::Noun => KindTest::Nominal,
                ClassDomain::Verb => KindTest::Kind(PhraseKind::VerbGroup),
            };
        }
    }
}

fn resolve_elements(es: &mut [PatternElement], classes: &DomainClasses) {
    for e in es {
        match e {
            PatternElement::Constraint(c) => {
                resolve_test(&mut c.test, classes);
                if let Some(x) = &mut c.complement {
                    resolve_test(&mut x.test, classes);
                }
            }
            PatternElement::Group { alternatives, .. } => alternatives.iter_mut().for_each(|a| resolve_elements(a, classes)),
            _ => {}
        }
    }
}

fn class_refs(es: &[PatternElement]) -> Vec<String> {
    let mut out = Vec::new();
    for e in es {
        match e {
            PatternElement::Constraint(c) => {
                out.extend(c.test.class.clone());
                out.extend(c.complement.as_ref().and_then(|x| x.test.class.clone()));
            }
            PatternElement::Group { alternatives, .. } => {
                for a in alternatives {
                    out.extend(class_refs(a));
                }
            }
            _ => {}
        }
    }
    out
}
