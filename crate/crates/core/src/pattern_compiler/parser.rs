use std::collections::BTreeSet;
use std::str::FromStr;

use super::ast::*;
use super::RuleSet;
use crate::phrase_chunker::PhraseKind;
use crate::rulefile::{split_sections, statements, LineError};
use crate::tokenizer::WordClass;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Lexed {
    tok: Tok,
    col: usize,
    /// Whitespace (or the start of input) precedes the token.
    spaced: bool,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_' || c == '.' || c == '\''
}

fn lex(line: usize, s: &str) -> Result<Vec<Lexed>, LineError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    let mut spaced = true;
    while i < chars.len() {
        let (col, c) = chars[i];
        if c.is_whitespace() {
            spaced = true;
            i += 1;
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            let mut lit = String::new();
            while j < chars.len() && chars[j].1 != '"' {
                lit.push(chars[j].1);
                j += 1;
            }
            if j == chars.len() {
                return Err(LineError::new(line, format!("unterminated string at column {}", col + 1)));
            }
            out.push(Lexed { tok: Tok::Str(lit), col, spaced });
            i = j + 1;
        } else if is_ident_char(c) {
            let mut j = i;
            let mut word = String::new();
            while j < chars.len() && is_ident_char(chars[j].1) {
                word.push(chars[j].1);
                j += 1;
            }
            out.push(Lexed { tok: Tok::Ident(word), col, spaced });
            i = j;
        } else if "<>/[]{}()?:|~*,=+@%".contains(c) {
            out.push(Lexed { tok: Tok::Sym(c), col, spaced });
            i += 1;
        } else {
            return Err(LineError::new(line, format!("unexpected `{c}` at column {}", col + 1)));
        }
        spaced = false;
    }
    Ok(out)
}

struct ElementParser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    line: usize,
    context: &'a str,
}

type PResult<T> = Result<T, LineError>;

impl ElementParser<'_> {
    fn new<'a>(line: usize, text: &str, context: &'a str) -> PResult<ElementParser<'a>> {
        Ok(ElementParser { toks: lex(line, text)?, pos: 0, line, context })
    }

    fn err<T>(&self, msg: impl AsRef<str>) -> PResult<T> {
        let col = self.toks.get(self.pos).map_or("end".to_string(), |t| format!("column {}", t.col + 1));
        Err(LineError::new(self.line, format!("{}, {col}: {}", self.context, msg.as_ref())))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn adjacent(&self) -> bool {
        self.toks.get(self.pos).is_some_and(|t| !t.spaced)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => self.err("expected a name"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Elements up to the end of input, `)` or `|`.
    fn sequence(&mut self) -> PResult<Vec<PatternElement>> {
        let mut out = Vec::new();
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Sym(')') | Tok::Sym('|')) {
                break;
            }
            out.push(self.element()?);
        }
        Ok(out)
    }

    fn element(&mut self) -> PResult<PatternElement> {
        match self.peek().cloned() {
            Some(Tok::Sym('~')) => {
                self.pos += 1;
                Ok(PatternElement::PseudoSyntax)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let mut alternatives = vec![self.sequence()?];
                while self.eat('|') {
                    alternatives.push(self.sequence()?);
                }
                self.expect(')')?;
                if alternatives.iter().any(Vec::is_empty) {
                    return self.err("empty alternative in group");
                }
                let optional = self.eat('?');
                Ok(PatternElement::Group { alternatives, optional })
            }
            Some(Tok::Sym('{')) => {
                self.pos += 1;
                let mut words = Vec::new();
                while !self.eat('}') {
                    match self.peek().cloned() {
                        Some(Tok::Ident(w)) => words.push(w),
                        Some(Tok::Sym('|')) => words.push("|".into()),
                        _ => return self.err("malformed skip schema"),
                    }
                    self.pos += 1;
                }
                self.expect('*')?;
                let schema = match words.join(" ").as_str() {
                    "Adjunct" => SkipSchema::Adjunct,
                    "Prep NG" => SkipSchema::PrepNg,
                    "NG | Other" => SkipSchema::NgOther,
                    other => return self.err(format!("unknown skip schema `{other}`")),
                };
                Ok(PatternElement::Skip(schema))
            }
            Some(Tok::Str(_)) => {
                let words = self.literals()?;
                let optional = self.eat('?');
                Ok(PatternElement::Literal { words, optional })
            }
            Some(_) => {
                let binding = self.binding()?;
                let test = self.primary()?;
                let complement = if self.adjacent() && self.peek() == Some(&Tok::Sym('(')) {
                    Some(self.complement()?)
                } else {
                    None
                };
                let optional = self.eat('?');
                Ok(PatternElement::Constraint(Constraint { binding, test, complement, optional }))
            }
            None => self.err("expected a pattern element"),
        }
    }

    fn literals(&mut self) -> PResult<Vec<String>> {
        let mut words = Vec::new();
        loop {
            match self.peek().cloned() {
                Some(Tok::Str(s)) => {
                    self.pos += 1;
                    words.push(s.to_lowercase());
                }
                _ => return self.err("expected a quoted literal"),
            }
            if !(self.peek() == Some(&Tok::Sym('/')) && matches!(self.peek_at(1), Some(Tok::Str(_)))) {
                return Ok(words);
            }
            self.pos += 1;
        }
    }

    fn binding(&mut self) -> PResult<Option<Binding>> {
        match (self.peek().cloned(), self.peek_at(1).cloned()) {
            (Some(Tok::Ident(name)), Some(Tok::Sym(':'))) => {
                self.pos += 2;
                Ok(Some(Binding::whole(name)))
            }
            (Some(Tok::Ident(m)), Some(Tok::Sym('('))) if m == "mods" => {
                self.pos += 2;
                let name = self.ident()?;
                self.expect(')')?;
                self.expect(':')?;
                Ok(Some(Binding { name, part: BindPart::Modifiers }))
            }
            _ => Ok(None),
        }
    }

    fn primary(&mut self) -> PResult<PhraseTest> {
        let mut test = match self.peek().cloned() {
            Some(Tok::Sym('<')) => {
                self.pos += 1;
                let class = self.ident()?;
                let plural = if self.eat('/') {
                    self.ident()?;
                    true
                } else {
                    false
                };
                self.expect('>')?;
                let mut t = PhraseTest::kind(KindTest::Any);
                t.class = Some(class);
                t.plural = plural;
                t.bracket = true;
                t
            }
            Some(Tok::Str(_)) => {
                let mut t = PhraseTest::kind(KindTest::Any);
                t.literals = self.literals()?;
                t
            }
            Some(Tok::Ident(word)) => {
                self.pos += 1;
                let kind = match word.as_str() {
                    "NG" => KindTest::Nominal,
                    "Any" => KindTest::Any,
                    other => match PhraseKind::from_str(other) {
                        Ok(k) => KindTest::Kind(k),
                        Err(_) => return self.err(format!("unknown phrase kind `{other}`")),
                    },
                };
                let mut t = PhraseTest::kind(kind);
                if self.adjacent() && self.eat('[') {
                    t.class = Some(self.ident()?);
                    if self.eat(':') {
                        match self.ident()?.as_str() {
                            "nominal" => t.nominal_form = true,
                            other => return self.err(format!("unknown class qualifier `{other}`")),
                        }
                    }
                    self.expect(']')?;
                    if self.eat('/') {
                        self.ident()?;
                        t.plural = true;
                    }
                }
                t
            }
            _ => return self.err("expected `<Class>`, a phrase kind, or a literal"),
        };
        if self.adjacent() && self.peek() == Some(&Tok::Sym('{')) {
            self.pos += 1;
            test.options = self.options()?;
        }
        Ok(test)
    }

    fn options(&mut self) -> PResult<VgOptions> {
        let mut o = VgOptions::default();
        loop {
            let word = self.ident()?;
            match word.as_str() {
                "active" => o.voice = Some(VoiceConstraint::Active),
                "passive" => o.voice = Some(VoiceConstraint::Passive),
                "gerund" => o.voice = Some(VoiceConstraint::Gerund),
                "infinitive" => o.voice = Some(VoiceConstraint::Infinitive),
                "bare" => o.bare = true,
                "beto" => o.be_to = Some(true),
                "nobeto" => o.be_to = Some(false),
                "copula" => o.copula = true,
                "adj" => o.adjective = true,
                "aux" => {
                    self.expect('=')?;
                    o.aux = Some(self.ident()?.to_lowercase());
                }
                other => return self.err(format!("unknown verb-group option `{other}`")),
            }
            if self.eat('}') {
                return Ok(o);
            }
            self.expect(',')?;
        }
    }

    fn complement(&mut self) -> PResult<Complement> {
        self.expect('(')?;
        let relation = self.ident()?.to_lowercase();
        let binding = self.binding()?;
        let test = self.primary()?;
        self.expect(')')?;
        Ok(Complement { relation, binding, test })
    }
}

/// Parses a sequence of pattern elements.
pub fn parse_elements(line: usize, text: &str, context: &str) -> Result<Vec<PatternElement>, LineError> {
    let mut p = ElementParser::new(line, text, context)?;
    let seq = p.sequence()?;
    if !p.at_end() {
        return p.err("unexpected token");
    }
    Ok(seq)
}

fn parse_test(line: usize, text: &str, context: &str) -> Result<PhraseTest, LineError> {
    let mut p = ElementParser::new(line, text, context)?;
    let t = p.primary()?;
    if !p.at_end() {
        return p.err("unexpected token after phrase test");
    }
    Ok(t)
}

/// Splits on `sep` outside quotes, parentheses, braces and brackets.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut quoted, mut start) = (0i32, false, 0);
    for (i, c) in s.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '(' | '{' | '[' if !quoted => depth += 1,
            ')' | '}' | ']' if !quoted => depth -= 1,
            c if c == sep && !quoted && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_term(line: usize, raw: &str, context: &str) -> Result<Term, LineError> {
    let t = raw.trim();
    let err = |m: &str| Err(LineError::new(line, format!("{context}: {m} `{t}`")));
    if let Some(lit) = t.strip_prefix('"').and_then(|x| x.strip_suffix('"')) {
        return Ok(Term::Literal(lit.to_string()));
    }
    match t {
        "@date" => return Ok(Term::Date),
        "@place" => return Ok(Term::Place),
        "" => return err("empty term"),
        _ => {}
    }
    if let Some((q, rest)) = t.split_once('(') {
        let var = rest.strip_suffix(')').map(str::trim);
        return match var {
            Some(v) if is_var(v) && !q.is_empty() => Ok(Term::Qualified { qualifier: q.trim().to_uppercase(), var: v.into() }),
            _ => err("malformed qualified term"),
        };
    }
    if is_var(t) {
        Ok(Term::Var(t.to_string()))
    } else if t.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '-' || c == '_') {
        Ok(Term::Symbol(t.to_string()))
    } else {
        err("unrecognized term")
    }
}

fn is_var(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_lowercase()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_action(line: usize, text: &str, context: &str) -> Result<Action, LineError> {
    let err = |m: &str| LineError::new(line, format!("{context}: {m}"));
    let (ty, body) = text.split_once('{').ok_or_else(|| err("action needs `TYPE { slots }`"))?;
    let body = body.trim().strip_suffix('}').ok_or_else(|| err("action is missing `}`"))?;
    let template_type = ty.trim().to_string();
    if template_type.is_empty() {
        return Err(err("action has no template type"));
    }
    let mut slots = Vec::new();
    for part in split_top(body, ',') {
        if part.trim().is_empty() {
            continue;
        }
        let (slot, value) = part.split_once(':').ok_or_else(|| err("slot fill needs `Slot: value`"))?;
        let terms = split_top(value, '+')
            .into_iter()
            .map(|t| parse_term(line, t, context))
            .collect::<Result<Vec<_>, _>>()?;
        slots.push((slot.trim().to_string(), terms));
    }
    Ok(Action { template_type, slots })
}

fn parse_rule(line: usize, stmt: &str) -> Result<PatternRule, LineError> {
    let rest = stmt.strip_prefix("rule ").ok_or_else(|| LineError::new(line, "expected `rule NAME: ...`"))?;
    let (header, body) = rest.split_once(':').ok_or_else(|| LineError::new(line, "rule header needs `:`"))?;
    let mut words = header.split_whitespace();
    let name = words.next().ok_or_else(|| LineError::new(line, "rule has no name"))?.to_string();
    let context = format!("rule `{name}`");
    let mut expand = false;
    let mut modality_filter = None;
    for w in words {
        match w.split_once('=') {
            None if w == "expand" => expand = true,
            Some(("modality", m)) if !m.is_empty() => modality_filter = Some(m.to_string()),
            _ => return Err(LineError::new(line, format!("{context}: unknown rule flag `{w}`"))),
        }
    }
    let (pattern, action) = body
        .split_once("=>")
        .ok_or_else(|| LineError::new(line, format!("{context}: missing `=> TYPE {{ ... }}` action")))?;
    let elements = parse_elements(line, pattern, &context)?;
    if elements.is_empty() {
        return Err(LineError::new(line, format!("{context}: empty pattern")));
    }
    let action = parse_action(line, action, &context)?;
    let mut seen = BTreeSet::new();
    for e in &elements {
        for b in e.bindings() {
            if !seen.insert(b.name.clone()) {
                return Err(LineError::new(line, format!("{context}: variable `{}` bound twice", b.name)));
            }
        }
    }
    for v in action.vars() {
        if !seen.contains(v) {
            return Err(LineError::new(line, format!("{context}: unbound variable `{v}`")));
        }
    }
    let subject = leading_subject(&elements);
    Ok(PatternRule {
        family: name.clone(),
        name,
        elements,
        action,
        expand,
        modality_filter,
        variant: None,
        subject,
        line,
    })
}

fn parse_class(line: usize, stmt: &str) -> Result<DomainClass, LineError> {
    let err = |m: &str| LineError::new(line, format!("{m}: `{stmt}`"));
    let (lhs, rhs) = stmt.split_once('=').ok_or_else(|| err("class needs `NG|VG Name = members`"))?;
    let mut head = lhs.split_whitespace();
    let domain = match head.next() {
        Some("NG") => ClassDomain::Noun,
        Some("VG") => ClassDomain::Verb,
        _ => return Err(err("class must start with NG or VG")),
    };
    let name = head.next().ok_or_else(|| err("class has no name"))?.to_string();
    if head.next().is_some() {
        return Err(err("class names are single words"));
    }
    let (members, nominal) = match rhs.split_once(';') {
        Some((m, n)) => {
            let n = n.trim().strip_prefix("nominal:").ok_or_else(|| err("expected `; nominal: ...`"))?;
            if domain != ClassDomain::Verb {
                return Err(err("only verb classes declare nominal forms"));
            }
            (m, Some(n))
        }
        None => (rhs, None),
    };
    let mut class = DomainClass {
        name,
        domain,
        words: Vec::new(),
        kinds: Vec::new(),
        word_classes: Vec::new(),
        any: false,
        nominal: Vec::new(),
        line,
    };
    for m in members.split(',').map(str::trim).filter(|m| !m.is_empty()) {
        if m == "*" {
            class.any = true;
        } else if let Some(k) = m.strip_prefix('@') {
            class.kinds.push(PhraseKind::from_str(k).map_err(|_| err(&format!("unknown phrase kind `{k}`")))?);
        } else if let Some(c) = m.strip_prefix('%') {
            class.word_classes.push(WordClass::from_str(c).map_err(|_| err(&format!("unknown word class `{c}`")))?);
        } else {
            class.words.push(m.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase());
        }
    }
    for n in nominal.into_iter().flat_map(|n| n.split(',')).map(str::trim).filter(|n| !n.is_empty()) {
        class.nominal.push(n.to_lowercase());
    }
    Ok(class)
}

/// Parses a whole rule file. Sections may repeat; their contents accumulate.
pub fn parse_rules(text: &str) -> Result<RuleSet, LineError> {
    let mut rs = RuleSet::default();
    let mut rule_names: BTreeSet<String> = BTreeSet::new();
    for section in split_sections(text)? {
        let stmts = statements(&section.lines);
        match section.name.as_str() {
            "PHRASES" => rs.phrases.extend(&section.lines)?,
            "MERGE" => rs.merge.extend(&section.lines)?,
            "TEMPLATES" => {
                for (line, stmt) in stmts {
                    let (ty, slots) =
                        stmt.split_once(':').ok_or_else(|| LineError::new(line, "template needs `TYPE: slots`"))?;
                    let slots: Vec<String> = slots.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                    if rs.templates.types.insert(ty.trim().to_string(), slots).is_some() {
                        return Err(LineError::new(line, format!("duplicate template type `{}`", ty.trim())));
                    }
                }
            }
            "CLASSES" => {
                for (line, stmt) in stmts {
                    let class = parse_class(line, &stmt)?;
                    if rs.classes.classes.contains_key(&class.name) {
                        return Err(LineError::new(line, format!("duplicate class `{}`", class.name)));
                    }
                    rs.classes.classes.insert(class.name.clone(), class);
                }
            }
            "VERBGROUPS" => {
                for (line, stmt) in stmts {
                    let (head, body) =
                        stmt.split_once(':').ok_or_else(|| LineError::new(line, "expected `Class Modality: elements`"))?;
                    let mut h = head.split_whitespace();
                    let (Some(class), Some(modality), None) = (h.next(), h.next(), h.next()) else {
                        return Err(LineError::new(line, "expected `Class Modality: elements`"));
                    };
                    let context = format!("verb-group rule `{class}`");
                    let elements = parse_elements(line, body, &context)?;
                    rs.verb_groups.push(EquivalenceRule { class: class.into(), modality: modality.into(), elements, line });
                }
            }
            "ENTITIES" => {
                for (line, stmt) in stmts {
                    let (ty, tests) = stmt.split_once(':').ok_or_else(|| LineError::new(line, "expected `Type: tests`"))?;
                    let context = format!("entity rule `{}`", ty.trim());
                    let tests = split_top(tests, '|')
                        .into_iter()
                        .map(|t| parse_test(line, t, &context))
                        .collect::<Result<Vec<_>, _>>()?;
                    rs.entities.push(EntityRule { entity_type: ty.trim().to_string(), tests, line });
                }
            }
            "SEEDS" | "PATTERNS" => {
                for (line, stmt) in stmts {
                    let rule = parse_rule(line, &stmt)?;
                    if !rule_names.insert(rule.name.clone()) {
                        return Err(LineError::new(line, format!("duplicate rule name `{}`", rule.name)));
                    }
                    if section.name == "SEEDS" {
                        rs.seeds.push(rule);
                    } else {
                        rs.patterns.push(rule);
                    }
                }
            }
            other => return Err(LineError::new(section.header_line, format!("unknown section [{other}]"))),
        }
    }
    rs.resolve_class_kinds();
    rs.check_references()?;
    Ok(rs)
}
