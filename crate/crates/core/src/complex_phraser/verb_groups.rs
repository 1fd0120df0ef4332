use super::{ComplexPhrase, Modality};
use crate::pattern_compiler::eval::test_matches;
use crate::pattern_compiler::{DomainClasses, EquivalenceRule, KindTest, PatternElement, PhraseTest};
use crate::phrase_chunker::PhraseKind;

/// End positions reachable by matching `elements` against `seq` from `pos`.
fn ends(elements: &[PatternElement], seq: &[ComplexPhrase], pos: usize, classes: &DomainClasses) -> Vec<usize> {
    let Some((first, rest)) = elements.split_first() else { return vec![pos] };
    let mut here: Vec<usize> = Vec::new();
    let one = |test: &PhraseTest| seq.get(pos).is_some_and(|cp| test_matches(test, cp, classes));
    match first {
        PatternElement::Constraint(c) => {
            if one(&c.test) {
                here.push(pos + 1);
            }
        }
        PatternElement::Literal { words, .. } => {
            let mut t = PhraseTest::kind(KindTest::Any);
            t.literals = words.clone();
            if one(&t) {
                here.push(pos + 1);
            }
        }
        PatternElement::Group { alternatives, .. } => {
            for alt in alternatives {
                here.extend(ends(alt, seq, pos, classes));
            }
        }
        PatternElement::Skip(_) | PatternElement::PseudoSyntax => {}
    }
    if first.is_optional() {
        here.push(pos);
    }
    here.sort_unstable();
    here.dedup();
    let mut out: Vec<usize> = here.into_iter().flat_map(|p| ends(rest, seq, p, classes)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Matches declared complex-verb-group rules at the head of `seq`. Returns the
/// number of phrases consumed with the rule's class and modality; the longest
/// match wins and earlier rules win ties.
pub fn classify_complex_verb_group(
    seq: &[ComplexPhrase],
    rules: &[EquivalenceRule],
    classes: &DomainClasses,
) -> Option<(usize, String, Modality)> {
    if seq.first().is_none_or(|c| c.kind() != PhraseKind::VerbGroup) {
        return None;
    }
    let mut best: Option<(usize, &EquivalenceRule)> = None;
    for rule in rules {
        let longest = ends(&rule.elements, seq, 0, classes)
            .into_iter()
            .filter(|&e| e > 0 && seq[e - 1].kind() == PhraseKind::VerbGroup)
            .max();
        if let Some(len) = longest {
            if best.is_none_or(|(b, _)| len > b) {
                best = Some((len, rule));
            }
        }
    }
    best.map(|(len, r)| (len, r.class.clone(), Modality(r.modality.clone())))
}

/// Collapses every matched complex verb group into one complex phrase whose
/// base is the final verb group; unmatched verb groups keep modality Existing.
pub fn collapse_verb_groups(
    cps: Vec<ComplexPhrase>,
    rules: &[EquivalenceRule],
    classes: &DomainClasses,
) -> Vec<ComplexPhrase> {
    let mut out = Vec::with_capacity(cps.len());
    let mut i = 0;
    while i < cps.len() {
        match classify_complex_verb_group(&cps[i..], rules, classes) {
            Some((len, class, modality)) => {
                let mut last = cps[i + len - 1].clone();
                let mut absorbed: Vec<_> = cps[i..i + len - 1].iter().flat_map(|c| c.all_phrases()).cloned().collect();
                absorbed.append(&mut last.absorbed);
                absorbed.sort_by_key(|p| (p.span.start, p.span.end));
                last.span = cps[i].span.cover(&last.span);
                last.absorbed = absorbed;
                last.equivalence_class = Some(class);
                last.modality = Some(modality);
                out.push(last);
                i += len;
            }
            None => {
                out.push(cps[i].clone());
                i += 1;
            }
        }
    }
    out
}
