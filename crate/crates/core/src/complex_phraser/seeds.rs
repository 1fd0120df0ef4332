use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ComplexPhrase;
use crate::event_matcher::{build_structure, find_matches};
use crate::pattern_compiler::eval::test_matches;
use crate::pattern_compiler::{CompiledPatternBase, DomainClasses, EntityRule};
use crate::phrase_chunker::PhraseKind;
use crate::template::TemplateStructure;
use crate::tokenizer::Span;

/// An entity assembled from a complex noun group: its name, descriptions and
/// attributes such as nationality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityStructure {
    pub entity_type: String,
    pub name: Option<String>,
    pub descriptions: Vec<String>,
    pub attributes: BTreeMap<String, String>,
    pub sentence: usize,
    pub span: Span,
}

/// A template structure recognized inside one complex phrase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    /// Index of the complex phrase the seed was found on.
    pub anchor: usize,
    pub structure: TemplateStructure,
}

fn describe(cp: &ComplexPhrase, out: &mut EntityStructure) {
    if cp.kind().is_name() {
        out.name.get_or_insert_with(|| cp.base.normalized().to_string());
    } else if cp.kind() == PhraseKind::NounGroup {
        out.descriptions.push(cp.base.text.clone());
    }
    for u in &cp.base.units {
        if let Some(n) = u.attrs.get("nationality") {
            out.attributes.entry("nationality".into()).or_insert_with(|| n.clone());
        }
    }
}

/// One entity per nominal complex phrase (or conjunct) satisfying an entity rule.
pub fn entity_structures(
    cps: &[ComplexPhrase],
    rules: &[EntityRule],
    classes: &DomainClasses,
    sentence: usize,
) -> Vec<EntityStructure> {
    let mut out = Vec::new();
    for cp in cps.iter().flat_map(|c| c.coordinated()) {
        let mut single = cp.clone();
        single.conjuncts.clear();
        let Some(rule) = rules.iter().find(|r| r.tests.iter().any(|t| test_matches(t, &single, classes))) else {
            continue;
        };
        let mut e = EntityStructure {
            entity_type: rule.entity_type.clone(),
            name: None,
            descriptions: Vec::new(),
            attributes: BTreeMap::new(),
            sentence,
            span: single.appositives.iter().fold(single.base.span, |s, a| s.cover(&a.span)),
        };
        describe(&single, &mut e);
        for a in &single.appositives {
            describe(a, &mut e);
        }
        out.push(e);
    }
    out
}

/// Runs the seed patterns; each match becomes a seed anchored at its first phrase.
pub fn seed_structures(cps: &[ComplexPhrase], base: &CompiledPatternBase, sentence: usize) -> Vec<Seed> {
    let (matches, _) = find_matches(cps, base);
    matches
        .iter()
        .map(|m| Seed { anchor: m.start, structure: build_structure(m, base, cps, sentence) })
        .collect()
}
