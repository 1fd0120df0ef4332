use super::Match;
use crate::complex_phraser::ComplexPhrase;
use crate::pattern_compiler::eval::BoundRef;
use crate::pattern_compiler::{BindPart, CompiledPatternBase, Term};
use crate::phrase_chunker::{Phrase, PhraseKind, Unit};
use crate::template::{DateFill, Fill, Provenance, SlotValue, TemplateStructure};
use crate::tokenizer::{EntityValue, Span, WordClass};

/// Surface text of `p` from `from` onward, with inner double quotes made single.
fn text_from(p: &Phrase, from: &Unit, to: Option<&Unit>) -> (String, Span) {
    let start = from.span.start;
    let end = to.map_or(p.span.end, |u| u.span.end);
    let text = match p.text.get(start - p.span.start..end - p.span.start) {
        Some(t) => t.to_string(),
        None => {
            let units = p.units.iter().filter(|u| u.span.start >= start && u.span.end <= end);
            units.map(|u| u.text.as_str()).collect::<Vec<_>>().join(" ")
        }
    };
    (text.trim().replace('"', "'"), Span::new(start, end))
}

fn date_fill(p: &Phrase) -> DateFill {
    let date = p.mention.as_ref().and_then(|m| match &m.value {
        EntityValue::Date(d) => Some(*d),
        _ => None,
    });
    let value = date.map_or_else(|| p.normalized().to_string(), |d| d.to_string());
    DateFill { qualifier: None, value, date, span: Some(p.span) }
}

fn single(cp: &ComplexPhrase) -> SlotValue {
    let p = &cp.base;
    if p.kind == PhraseKind::NounGroup {
        if let Some(name) = cp.appositives.iter().find(|a| a.kind().is_name()) {
            return single(name);
        }
    }
    match p.kind {
        k if k.is_name() => SlotValue::Text(Fill::name(p.normalized(), Some(p.span))),
        PhraseKind::Date => SlotValue::Date(date_fill(p)),
        PhraseKind::Currency => match p.mention.as_ref().map(|m| &m.value) {
            Some(EntityValue::Money(m)) => SlotValue::Money(m.clone()),
            _ => SlotValue::Text(Fill::description(p.normalized(), Some(p.span))),
        },
        PhraseKind::NounGroup if p.head_unit().has(WordClass::Temporal) && !p.head_unit().is_capitalized() => {
            SlotValue::Date(DateFill { qualifier: None, value: p.text.clone(), date: None, span: Some(p.span) })
        }
        PhraseKind::NounGroup => {
            // A measure's quantity is not part of the fill.
            let first = match cp.measure {
                Some(_) => p.units[..p.head].iter().find(|u| !u.has(WordClass::Num)).unwrap_or(p.head_unit()),
                None => &p.units[0],
            };
            let (text, span) = text_from(p, first, None);
            SlotValue::Text(Fill::description(text, Some(span)))
        }
        _ => SlotValue::Text(Fill::description(p.normalized(), Some(p.span))),
    }
}

/// The slot value a binding denotes.
pub fn fill_of(b: &BoundRef, cps: &[ComplexPhrase]) -> Option<SlotValue> {
    let cp = b.resolve(cps);
    if b.part == BindPart::Modifiers {
        let mods = cp.base.modifiers();
        let (first, last) = (mods.first()?, mods.last()?);
        let (text, span) = text_from(&cp.base, first, Some(last));
        return Some(SlotValue::Text(Fill::description(text, Some(span))));
    }
    if cp.conjuncts.is_empty() {
        return Some(single(cp));
    }
    let mut head = cp.clone();
    let rest = std::mem::take(&mut head.conjuncts);
    Some(SlotValue::List(std::iter::once(&head).chain(&rest).map(single).collect()))
}

fn term_values(t: &Term, m: &Match, cps: &[ComplexPhrase]) -> Vec<SlotValue> {
    match t {
        Term::Var(v) => m.bindings.get(v).and_then(|b| fill_of(b, cps)).into_iter().collect(),
        Term::Symbol(s) => vec![SlotValue::Symbol(s.clone())],
        Term::Literal(s) => vec![SlotValue::Text(Fill::description(s.clone(), None))],
        Term::Qualified { qualifier, var } => {
            let Some(v) = m.bindings.get(var).and_then(|b| fill_of(b, cps)) else { return Vec::new() };
            let mut d = match v {
                SlotValue::Date(d) => d,
                other => DateFill { qualifier: None, value: other.display(), date: None, span: other.span() },
            };
            d.qualifier = Some(qualifier.to_uppercase());
            vec![SlotValue::Date(d)]
        }
        Term::Date => m.date.and_then(|b| fill_of(&b, cps)).into_iter().collect(),
        Term::Place => m.place.and_then(|b| fill_of(&b, cps)).into_iter().collect(),
    }
}

/// Instantiates the matched rule's action.
pub fn build_structure(m: &Match, base: &CompiledPatternBase, cps: &[ComplexPhrase], sentence: usize) -> TemplateStructure {
    let rule = &base.rules[m.rule];
    let mut s = TemplateStructure::new(rule.action.template_type.clone());
    for (slot, terms) in &rule.action.slots {
        let mut values: Vec<SlotValue> = Vec::new();
        for t in terms {
            for v in term_values(t, m, cps) {
                match v {
                    SlotValue::List(items) => values.extend(items),
                    v => values.push(v),
                }
            }
        }
        match values.len() {
            0 => {}
            1 => {
                s.slots.insert(slot.clone(), values.pop().expect("one"));
            }
            _ => {
                s.slots.insert(slot.clone(), SlotValue::List(values));
            }
        }
    }
    s.modality = m.modality.as_ref().map(|x| x.0.clone());
    s.provenance.push(Provenance {
        sentence,
        span: m.span,
        rule: m.rule_name.clone(),
        subject_missing: m.subject_missing,
    });
    s
}
