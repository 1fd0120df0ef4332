use super::ast::*;
use super::CompileError;
use crate::phrase_chunker::PhraseKind;

fn kind_constraint(kind: PhraseKind, optional: bool) -> PatternElement {
    let mut c = Constraint::new(PhraseTest::kind(KindTest::Kind(kind)));
    c.optional = optional;
    PatternElement::Constraint(c)
}

fn with_options(v: &Constraint, voice: VoiceConstraint, be_to: Option<bool>, bare: bool) -> PatternElement {
    let mut c = v.clone();
    c.test.options.voice = Some(voice);
    c.test.options.be_to = be_to;
    c.test.options.bare |= bare;
    PatternElement::Constraint(c)
}

fn required(c: &Constraint) -> Constraint {
    Constraint { optional: false, ..c.clone() }
}

/// The S-V-O transformation family of an `expand` rule; other rules pass
/// through unchanged.
pub fn expand_transformations(rule: &PatternRule, classes: &DomainClasses) -> Result<Vec<PatternRule>, CompileError> {
    if !rule.expand {
        return Ok(vec![rule.clone()]);
    }
    let not_svo = || CompileError::NotSvo { rule: rule.name.clone() };
    let (subj, verb, obj) = match &rule.elements[..] {
        [PatternElement::Constraint(s), PatternElement::Constraint(v), PatternElement::Constraint(o), ..]
            if s.test.is_nominal() && v.test.is_verbal() && o.test.is_nominal() && !v.optional && !o.optional =>
        {
            (s, v, o)
        }
        _ => return Err(not_svo()),
    };
    let rest = &rule.elements[3..];
    let subject_name = subj.binding.as_ref().map(|b| b.name.clone());
    let s_req = PatternElement::Constraint(required(subj));
    let o_el = PatternElement::Constraint(obj.clone());
    let lit = |w: &str| PatternElement::Literal { words: vec![w.to_string()], optional: false };
    // Subject plus the subject-to-verb skip schemata; optional as a unit.
    let subject_slot = PatternElement::Group {
        alternatives: vec![vec![s_req.clone(), PatternElement::PseudoSyntax]],
        optional: subj.optional,
    };
    let by_subject = PatternElement::Group { alternatives: vec![vec![lit("by"), s_req.clone()]], optional: subj.optional };
    let relpro = || vec![kind_constraint(PhraseKind::Comma, true), kind_constraint(PhraseKind::RelativePronoun, false)];

    let mut variants: Vec<(Variant, Vec<PatternElement>)> = vec![
        (Variant::Active, vec![subject_slot.clone(), with_options(verb, VoiceConstraint::Active, Some(false), false), o_el.clone()]),
        (
            Variant::Passive,
            vec![
                o_el.clone(),
                PatternElement::PseudoSyntax,
                with_options(verb, VoiceConstraint::Passive, Some(false), false),
                by_subject.clone(),
            ],
        ),
        (
            Variant::SubjectRelative,
            [vec![s_req.clone()], relpro(), vec![with_options(verb, VoiceConstraint::Active, Some(false), false), o_el.clone()]].concat(),
        ),
        (
            Variant::ObjectRelative,
            [vec![o_el.clone()], relpro(), vec![with_options(verb, VoiceConstraint::Passive, Some(false), false), by_subject.clone()]]
                .concat(),
        ),
        (
            Variant::ReducedRelative,
            vec![o_el.clone(), with_options(verb, VoiceConstraint::Passive, Some(false), true), lit("by"), s_req.clone()],
        ),
        (Variant::IsToActive, vec![subject_slot, with_options(verb, VoiceConstraint::Active, Some(true), false), o_el.clone()]),
        (
            Variant::IsToPassive,
            vec![o_el.clone(), PatternElement::PseudoSyntax, with_options(verb, VoiceConstraint::Passive, Some(true), false), by_subject],
        ),
    ];
    let class = verb.test.class.as_ref().and_then(|c| classes.get(c));
    if class.is_some_and(|c| !c.nominal.is_empty()) {
        let mut copula = PhraseTest::kind(KindTest::Kind(PhraseKind::VerbGroup));
        copula.options.copula = true;
        let mut nominal = PhraseTest::kind(KindTest::Nominal);
        nominal.class = verb.test.class.clone();
        nominal.nominal_form = true;
        let binding = obj.binding.as_ref().map(|b| Binding { name: b.name.clone(), part: BindPart::Modifiers });
        let agent = Constraint { binding, test: nominal, complement: None, optional: false };
        variants.push((
            Variant::AgentiveNominal,
            vec![s_req, PatternElement::Constraint(Constraint::new(copula)), PatternElement::Constraint(agent)],
        ));
    }
    Ok(variants
        .into_iter()
        .map(|(variant, mut elements)| {
            elements.extend(rest.iter().cloned());
            PatternRule {
                name: format!("{}#{}", rule.name, variant.suffix()),
                elements,
                action: rule.action.clone(),
                expand: false,
                modality_filter: rule.modality_filter.clone(),
                family: rule.family.clone(),
                variant: Some(variant),
                subject: subject_name.clone(),
                line: rule.line,
            }
        })
        .collect())
}

/// For rules written without expansion: a leading subject followed directly by
/// a verb group gets the subject-to-verb skip schemata between them.
pub fn insert_pseudo_syntax(rule: &PatternRule) -> PatternRule {
    let mut out = rule.clone();
    if rule.variant.is_some() || rule.elements.contains(&PatternElement::PseudoSyntax) {
        return out;
    }
    if let [PatternElement::Constraint(s), PatternElement::Constraint(v), ..] = &rule.elements[..] {
        if s.test.is_nominal() && v.test.is_verbal() {
            out.elements.insert(1, PatternElement::PseudoSyntax);
        }
    }
    out
}

fn interleave(elements: &[PatternElement]) -> Vec<PatternElement> {
    let mut out: Vec<PatternElement> = Vec::with_capacity(elements.len() * 2);
    for e in elements {
        let e = match e {
            PatternElement::Group { alternatives, optional } => PatternElement::Group {
                alternatives: alternatives.iter().map(|a| interleave(a)).collect(),
                optional: *optional,
            },
            other => other.clone(),
        };
        let boundary = out.last().is_some_and(|prev| {
            !matches!(prev, PatternElement::Skip(_)) && !matches!(e, PatternElement::Skip(_) | PatternElement::PseudoSyntax)
        });
        if boundary {
            out.push(PatternElement::Skip(SkipSchema::Adjunct));
        }
        out.push(e);
    }
    out
}

/// Adjunct skips at every inter-element position, inside groups too. Rules
/// that extract `@date` or `@place` also read trailing adjuncts ("was found
/// dead today").
pub fn insert_adjunct_tolerance(rule: &PatternRule) -> PatternRule {
    let mut elements = interleave(&rule.elements);
    let wants_adjuncts = rule.action.uses(&Term::Date) || rule.action.uses(&Term::Place);
    if wants_adjuncts && !matches!(elements.last(), None | Some(PatternElement::Skip(_))) {
        elements.push(PatternElement::Skip(SkipSchema::Adjunct));
    }
    PatternRule { elements, ..rule.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern_compiler::parse_rules;
    use crate::pattern_compiler::printer::print_elements;

    const RULES: &str = "[CLASSES]\nNG Company = @CompanyName, company\nVG Manufacture = manufacture ; nominal: manufacturer\n\
        VG Form = form\n[PATTERNS]\nrule M expand:\n    agent:<Company> <Manufacture> product:NG\n    => MANUFACTURE { Agent: agent, Product: product }\n\
        rule F expand:\n    subj:<Company>? <Form> NG\n    => TIE-UP { Entities: subj }\n\
        rule Plain:\n    co:<Company> <Form> NG\n    => TIE-UP { Entities: co }\n";

    #[test]
    fn family_has_eight_members_with_nominal() {
        let rs = parse_rules(RULES).unwrap();
        let m = expand_transformations(&rs.patterns[0], &rs.classes).unwrap();
        let variants: Vec<Variant> = m.iter().map(|r| r.variant.unwrap()).collect();
        assert_eq!(variants, Variant::ALL);
        let agentive = print_elements(&m[7].elements);
        assert_eq!(agentive, "agent:<Company> VerbGroup{copula} mods(product):NG[Manufacture:nominal]");
        assert!(m.iter().all(|r| r.family == "M" && r.subject.as_deref() == Some("agent")));
        let names: std::collections::BTreeSet<&str> = m.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names.len(), 8);
    }

    #[test]
    fn no_nominal_form_gives_seven() {
        let rs = parse_rules(RULES).unwrap();
        let f = expand_transformations(&rs.patterns[1], &rs.classes).unwrap();
        assert_eq!(f.len(), 7);
        let passive = print_elements(&f[1].elements);
        assert_eq!(passive, "NG ~ <Form>{passive,nobeto} (\"by\" subj:<Company>)?");
    }

    #[test]
    fn unexpanded_rule_is_identity() {
        let rs = parse_rules(RULES).unwrap();
        assert_eq!(expand_transformations(&rs.patterns[2], &rs.classes).unwrap(), vec![rs.patterns[2].clone()]);
    }

    #[test]
    fn non_svo_expand_is_an_error() {
        let rs = parse_rules("[PATTERNS]\nrule X expand:\n    VG NG\n    => T { A: B }\n").unwrap();
        assert!(matches!(expand_transformations(&rs.patterns[0], &rs.classes), Err(CompileError::NotSvo { .. })));
    }

    #[test]
    fn adjuncts_between_elements_not_before_pseudo_syntax() {
        let rs = parse_rules(RULES).unwrap();
        let r = insert_adjunct_tolerance(&insert_pseudo_syntax(&rs.patterns[2]));
        assert_eq!(print_elements(&r.elements), "co:<Company> ~ {Adjunct}* <Form> {Adjunct}* NG");
        let single = parse_rules("[PATTERNS]\nrule S:\n    NG\n    => T { A: B }\n").unwrap();
        assert_eq!(insert_adjunct_tolerance(&single.patterns[0]).elements.len(), 1);
    }
}
