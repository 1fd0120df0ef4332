use super::ast::*;
use super::RuleSet;

fn options(o: &VgOptions) -> String {
    if o.is_empty() {
        return String::new();
    }
    let mut parts: Vec<String> = Vec::new();
    if let Some(v) = o.voice {
        parts.push(v.keyword().into());
    }
    if o.bare {
        parts.push("bare".into());
    }
    match o.be_to {
        Some(true) => parts.push("beto".into()),
        Some(false) => parts.push("nobeto".into()),
        None => {}
    }
    if o.copula {
        parts.push("copula".into());
    }
    if o.adjective {
        parts.push("adj".into());
    }
    if let Some(a) = &o.aux {
        parts.push(format!("aux={a}"));
    }
    format!("{{{}}}", parts.join(","))
}

fn literals(words: &[String]) -> String {
    words.iter().map(|w| format!("\"{w}\"")).collect::<Vec<_>>().join("/")
}

pub fn print_test(t: &PhraseTest) -> String {
    let mut out = if !t.literals.is_empty() && t.kind == KindTest::Any && t.class.is_none() {
        literals(&t.literals)
    } else {
        match (&t.class, t.kind) {
            (Some(c), _) if t.bracket => {
                format!("<{c}{}>", if t.plural { "/s" } else { "" })
            }
            (class, kind) => {
                let mut s = match kind {
                    KindTest::Nominal => "NG".to_string(),
                    KindTest::Any => "Any".to_string(),
                    KindTest::Kind(k) => k.ident().to_string(),
                };
                if let Some(c) = class {
                    s.push_str(&format!("[{c}{}]", if t.nominal_form { ":nominal" } else { "" }));
                    if t.plural {
                        s.push_str("/s");
                    }
                }
                s
            }
        }
    };
    out.push_str(&options(&t.options));
    out
}

fn binding(b: &Option<Binding>) -> String {
    match b {
        None => String::new(),
        Some(Binding { name, part: BindPart::Whole }) => format!("{name}:"),
        Some(Binding { name, part: BindPart::Modifiers }) => format!("mods({name}):"),
    }
}

pub fn print_element(e: &PatternElement) -> String {
    let opt = |o: bool| if o { "?" } else { "" };
    match e {
        PatternElement::Constraint(c) => {
            let mut s = format!("{}{}", binding(&c.binding), print_test(&c.test));
            if let Some(x) = &c.complement {
                s.push_str(&format!("({} {}{})", x.relation, binding(&x.binding), print_test(&x.test)));
            }
            s.push_str(opt(c.optional));
            s
        }
        PatternElement::Literal { words, optional } => format!("{}{}", literals(words), opt(*optional)),
        PatternElement::Skip(schema) => schema.notation().to_string(),
        PatternElement::Group { alternatives, optional } => {
            let alts: Vec<String> = alternatives.iter().map(|a| print_elements(a)).collect();
            format!("({}){}", alts.join(" | "), opt(*optional))
        }
        PatternElement::PseudoSyntax => "~".to_string(),
    }
}

pub fn print_elements(es: &[PatternElement]) -> String {
    es.iter().map(print_element).collect::<Vec<_>>().join(" ")
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) | Term::Symbol(v) => v.clone(),
        Term::Literal(l) => format!("\"{l}\""),
        Term::Qualified { qualifier, var } => format!("{}({var})", qualifier.to_lowercase()),
        Term::Date => "@date".into(),
        Term::Place => "@place".into(),
    }
}

pub fn print_action(a: &Action) -> String {
    let slots: Vec<String> = a
        .slots
        .iter()
        .map(|(s, ts)| format!("{s}: {}", ts.iter().map(term).collect::<Vec<_>>().join(" + ")))
        .collect();
    format!("{} {{ {} }}", a.template_type, slots.join(", "))
}

pub fn print_rule(r: &PatternRule) -> String {
    let mut head = format!("rule {}", r.name);
    if r.expand {
        head.push_str(" expand");
    }
    if let Some(m) = &r.modality_filter {
        head.push_str(&format!(" modality={m}"));
    }
    format!("{head}:\n    {}\n    => {}\n", print_elements(&r.elements), print_action(&r.action))
}

fn print_class(c: &DomainClass) -> String {
    let mut members: Vec<String> = Vec::new();
    if c.any {
        members.push("*".into());
    }
    members.extend(c.kinds.iter().map(|k| format!("@{}", k.ident())));
    members.extend(c.word_classes.iter().map(|w| format!("%{}", w.label())));
    members.extend(c.words.iter().cloned());
    let domain = match c.domain {
        ClassDomain::Noun => "NG",
        ClassDomain::Verb => "VG",
    };
    let mut s = format!("{domain} {} = {}", c.name, members.join(", "));
    if !c.nominal.is_empty() {
        s.push_str(&format!(" ; nominal: {}", c.nominal.join(", ")));
    }
    s
}

/// Canonical rule-file text. Parsing the output reproduces the rule set.
pub fn print_rules(rs: &RuleSet) -> String {
    let mut out = String::new();
    let mut section = |name: &str, body: String| {
        if !body.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{name}]\n{body}"));
        }
    };
    section("PHRASES", rs.phrases.statements.iter().map(|s| format!("{s}\n")).collect());
    section(
        "TEMPLATES",
        rs.templates.types.iter().map(|(t, slots)| format!("{t}: {}\n", slots.join(", "))).collect(),
    );
    section("CLASSES", rs.classes.classes.values().map(|c| format!("{}\n", print_class(c))).collect());
    section(
        "VERBGROUPS",
        rs.verb_groups.iter().map(|v| format!("{} {}: {}\n", v.class, v.modality, print_elements(&v.elements))).collect(),
    );
    section(
        "ENTITIES",
        rs.entities
            .iter()
            .map(|e| format!("{}: {}\n", e.entity_type, e.tests.iter().map(print_test).collect::<Vec<_>>().join(" | ")))
            .collect(),
    );
    section("SEEDS", rs.seeds.iter().map(print_rule).collect());
    section("PATTERNS", rs.patterns.iter().map(print_rule).collect());
    section("MERGE", rs.merge.print());
    out
}
