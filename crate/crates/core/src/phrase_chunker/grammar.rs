//! Regular grammars over word units, compiled to Thompson automata.
//!
//! ```text
//! A = adv*                                # macro
//! NounGroup := pron | Spec? Mods? noun    # production
//! ```
//!
//! Atoms are word-class labels (a unit matches if it has the class), quoted
//! literals (compared with the lowercased unit text) and macro names. Atoms
//! combine with `&` and `!` (`noun&!temporal`). Operators are juxtaposition,
//! `|`, `?`, `*`, `+` and parentheses.

use std::collections::HashMap;

use crate::rulefile::{statements, LineError};
use crate::tokenizer::WordClass;

use super::{PhraseKind, Unit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Class(WordClass),
    Literal(String),
    Not(Box<Atom>),
    And(Vec<Atom>),
}

impl Atom {
    pub fn matches(&self, unit: &Unit) -> bool {
        match self {
            Atom::Class(c) => unit.has(*c),
            Atom::Literal(l) => unit.lower == *l,
            Atom::Not(a) => !a.matches(unit),
            Atom::And(all) => all.iter().all(|a| a.matches(unit)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    Atom(Atom),
    Seq(Vec<Regex>),
    Alt(Vec<Regex>),
    Opt(Box<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
}

#[derive(Debug, Clone, Default)]
struct State {
    eps: Vec<usize>,
    on: Vec<(Atom, usize)>,
}

/// Thompson automaton with a single start and a single accepting state.
#[derive(Debug, Clone)]
pub struct Nfa {
    states: Vec<State>,
    start: usize,
    accept: usize,
}

impl Nfa {
    pub fn compile(re: &Regex) -> Nfa {
        let mut nfa = Nfa { states: Vec::new(), start: 0, accept: 0 };
        let (s, a) = nfa.build(re);
        nfa.start = s;
        nfa.accept = a;
        nfa
    }

    fn state(&mut self) -> usize {
        self.states.push(State::default());
        self.states.len() - 1
    }

    fn build(&mut self, re: &Regex) -> (usize, usize) {
        match re {
            Regex::Atom(atom) => {
                let (s, a) = (self.state(), self.state());
                self.states[s].on.push((atom.clone(), a));
                (s, a)
            }
            Regex::Seq(items) => {
                let s = self.state();
                let mut cur = s;
                for item in items {
                    let (is, ia) = self.build(item);
                    self.states[cur].eps.push(is);
                    cur = ia;
                }
                (s, cur)
            }
            Regex::Alt(items) => {
                let (s, a) = (self.state(), self.state());
                for item in items {
                    let (is, ia) = self.build(item);
                    self.states[s].eps.push(is);
                    self.states[ia].eps.push(a);
                }
                (s, a)
            }
            Regex::Opt(inner) => {
                let (is, ia) = self.build(inner);
                self.states[is].eps.push(ia);
                (is, ia)
            }
            Regex::Star(inner) | Regex::Plus(inner) => {
                let (s, a) = (self.state(), self.state());
                let (is, ia) = self.build(inner);
                self.states[s].eps.push(is);
                self.states[ia].eps.push(is);
                self.states[ia].eps.push(a);
                if matches!(re, Regex::Star(_)) {
                    self.states[s].eps.push(a);
                }
                (s, a)
            }
        }
    }

    fn close(&self, set: &mut Vec<usize>, seen: &mut [bool]) {
        let mut stack = set.clone();
        while let Some(s) = stack.pop() {
            for &t in &self.states[s].eps {
                if !seen[t] {
                    seen[t] = true;
                    set.push(t);
                    stack.push(t);
                }
            }
        }
    }

    /// Length of the longest non-empty match of `units` starting at index 0.
    pub fn longest_prefix(&self, units: &[Unit]) -> Option<usize> {
        self.prefix_ends(units).last().copied()
    }

    pub fn matches_exactly(&self, units: &[Unit]) -> bool {
        !units.is_empty() && self.prefix_ends(units).last() == Some(&units.len())
    }

    /// Every non-empty prefix length that ends in the accepting state.
    fn prefix_ends(&self, units: &[Unit]) -> Vec<usize> {
        let n = self.states.len();
        let mut seen = vec![false; n];
        let mut cur = vec![self.start];
        seen[self.start] = true;
        self.close(&mut cur, &mut seen);
        let mut ends = Vec::new();
        for (k, unit) in units.iter().enumerate() {
            let mut seen = vec![false; n];
            let mut next = Vec::new();
            for &s in &cur {
                for (atom, t) in &self.states[s].on {
                    if !seen[*t] && atom.matches(unit) {
                        seen[*t] = true;
                        next.push(*t);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            self.close(&mut next, &mut seen);
            if seen[self.accept] {
                ends.push(k + 1);
            }
            cur = next;
        }
        ends
    }
}

#[derive(Debug, Clone)]
pub struct Production {
    pub kind: PhraseKind,
    pub source: String,
    pub nfa: Nfa,
}

/// An ordered list of productions. Declaration order breaks ties between
/// phrases of different kinds with identical extent.
#[derive(Debug, Clone, Default)]
pub struct PhraseGrammar {
    pub productions: Vec<Production>,
    macros: HashMap<String, Regex>,
    /// Statements in declaration order, whitespace-normalized, for printing.
    pub statements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Lit(String),
    Sym(char),
}

fn lex(line: usize, s: &str) -> Result<Vec<Tok>, LineError> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut lit = String::new();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(ch) => lit.push(ch),
                    None => return Err(LineError::new(line, "unterminated literal")),
                }
            }
            out.push(Tok::Lit(lit.to_lowercase()));
        } else if "|?*+()&!".contains(c) {
            chars.next();
            out.push(Tok::Sym(c));
        } else if c.is_alphanumeric() || c == '_' || c == '-' {
            let mut id = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_alphanumeric() || ch == '_' || ch == '-' {
                    id.push(ch);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Ident(id));
        } else {
            return Err(LineError::new(line, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
    macros: &'a HashMap<String, Regex>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn alt(&mut self) -> Result<Regex, LineError> {
        let mut items = vec![self.seq()?];
        while self.peek() == Some(&Tok::Sym('|')) {
            self.pos += 1;
            items.push(self.seq()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Regex::Alt(items) })
    }

    fn seq(&mut self) -> Result<Regex, LineError> {
        let mut items = Vec::new();
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Sym('|') | Tok::Sym(')')) {
                break;
            }
            items.push(self.postfix()?);
        }
        match items.len() {
            0 => Err(LineError::new(self.line, "empty alternative")),
            1 => Ok(items.pop().unwrap()),
            _ => Ok(Regex::Seq(items)),
        }
    }

    fn postfix(&mut self) -> Result<Regex, LineError> {
        let mut re = self.primary()?;
        while let Some(Tok::Sym(op @ ('?' | '*' | '+'))) = self.peek().cloned() {
            self.pos += 1;
            re = match op {
                '?' => Regex::Opt(Box::new(re)),
                '*' => Regex::Star(Box::new(re)),
                _ => Regex::Plus(Box::new(re)),
            };
        }
        Ok(re)
    }

    fn primary(&mut self) -> Result<Regex, LineError> {
        let first = self.conjunct()?;
        if self.peek() != Some(&Tok::Sym('&')) {
            return Ok(first);
        }
        let mut atoms = vec![self.as_atom(first)?];
        while self.peek() == Some(&Tok::Sym('&')) {
            self.pos += 1;
            let next = self.conjunct()?;
            atoms.push(self.as_atom(next)?);
        }
        Ok(Regex::Atom(Atom::And(atoms)))
    }

    fn as_atom(&self, re: Regex) -> Result<Atom, LineError> {
        match re {
            Regex::Atom(a) => Ok(a),
            _ => Err(LineError::new(self.line, "`&` and `!` apply to single-word tests only")),
        }
    }

    fn conjunct(&mut self) -> Result<Regex, LineError> {
        if self.peek() == Some(&Tok::Sym('!')) {
            self.pos += 1;
            let inner = self.conjunct()?;
            return Ok(Regex::Atom(Atom::Not(Box::new(self.as_atom(inner)?))));
        }
        let tok = self.peek().cloned();
        self.pos += 1;
        match tok {
            Some(Tok::Sym('(')) => {
                let re = self.alt()?;
                if self.peek() != Some(&Tok::Sym(')')) {
                    return Err(LineError::new(self.line, "missing `)`"));
                }
                self.pos += 1;
                Ok(re)
            }
            Some(Tok::Lit(l)) => Ok(Regex::Atom(Atom::Literal(l))),
            Some(Tok::Ident(id)) => {
                if let Some(m) = self.macros.get(&id) {
                    return Ok(m.clone());
                }
                id.parse::<WordClass>()
                    .map(|c| Regex::Atom(Atom::Class(c)))
                    .map_err(|_| LineError::new(self.line, format!("unknown word class or macro `{id}`")))
            }
            Some(t) => Err(LineError::new(self.line, format!("unexpected `{t:?}`"))),
            None => Err(LineError::new(self.line, "unexpected end of expression")),
        }
    }
}

impl PhraseGrammar {
    /// Parses the body lines of a PHRASES section.
    pub fn parse_lines(lines: &[(usize, &str)]) -> Result<PhraseGrammar, LineError> {
        let mut g = PhraseGrammar::default();
        g.extend(lines)?;
        Ok(g)
    }

    pub fn extend(&mut self, lines: &[(usize, &str)]) -> Result<(), LineError> {
        for (line, stmt) in statements(lines) {
            if let Some((lhs, rhs)) = stmt.split_once(":=") {
                let kind: PhraseKind = lhs
                    .trim()
                    .parse()
                    .map_err(|_| LineError::new(line, format!("unknown phrase kind `{}`", lhs.trim())))?;
                let re = self.expr(line, rhs)?;
                self.productions.push(Production { kind, source: rhs.trim().to_string(), nfa: Nfa::compile(&re) });
                self.statements.push(format!("{} := {}", lhs.trim(), rhs.trim()));
            } else if let Some((lhs, rhs)) = stmt.split_once('=') {
                let name = lhs.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(LineError::new(line, format!("bad macro name `{name}`")));
                }
                if self.macros.contains_key(name) {
                    return Err(LineError::new(line, format!("duplicate macro `{name}`")));
                }
                let re = self.expr(line, rhs)?;
                self.macros.insert(name.to_string(), re);
                self.statements.push(format!("{name} = {}", rhs.trim()));
            } else {
                return Err(LineError::new(line, "expected `Name = expr` or `Kind := expr`"));
            }
        }
        Ok(())
    }

    fn expr(&self, line: usize, text: &str) -> Result<Regex, LineError> {
        let toks = lex(line, text)?;
        let mut p = Parser { toks, pos: 0, line, macros: &self.macros };
        let re = p.alt()?;
        if p.pos != p.toks.len() {
            return Err(LineError::new(line, "trailing tokens in expression"));
        }
        Ok(re)
    }

    /// The production set shipped with the crate.
    pub fn builtin() -> PhraseGrammar {
        let text = include_str!("../../data/phrases.rules");
        let sections = crate::rulefile::split_sections(text).expect("builtin phrase grammar");
        let mut g = PhraseGrammar::default();
        for s in sections.iter().filter(|s| s.name == "PHRASES") {
            g.extend(&s.lines).expect("builtin phrase grammar");
        }
        g
    }

    pub fn is_empty(&self) -> bool {
        self.productions.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(lower: &str, classes: &[WordClass]) -> Unit {
        Unit::synthetic(lower, classes)
    }

    #[test]
    fn alternation_and_repetition() {
        let g = PhraseGrammar::parse_lines(&[(1, "M = adj | noun"), (2, "NounGroup := det? M* noun")]).unwrap();
        let nfa = &g.productions[0].nfa;
        let units = [
            unit("a", &[WordClass::Det]),
            unit("local", &[WordClass::Adj]),
            unit("concern", &[WordClass::Noun]),
            unit("and", &[WordClass::Conj]),
        ];
        assert_eq!(nfa.longest_prefix(&units), Some(3));
        assert_eq!(nfa.longest_prefix(&units[3..]), None);
        assert!(nfa.matches_exactly(&units[..3]));
        assert!(!nfa.matches_exactly(&units[..2]));
    }

    #[test]
    fn literals_compare_lowercase() {
        let g = PhraseGrammar::parse_lines(&[(1, "VerbGroup := \"To\" verb")]).unwrap();
        let units = [unit("to", &[WordClass::Prep]), unit("produce", &[WordClass::Verb])];
        assert_eq!(g.productions[0].nfa.longest_prefix(&units), Some(2));
    }

    #[test]
    fn class_conjunction_and_negation() {
        let g = PhraseGrammar::parse_lines(&[(1, "NounGroup := (noun&!temporal)+")]).unwrap();
        let units = [
            unit("mayor", &[WordClass::Noun]),
            unit("today", &[WordClass::Noun, WordClass::Temporal]),
        ];
        assert_eq!(g.productions[0].nfa.longest_prefix(&units), Some(1));
        assert!(PhraseGrammar::parse_lines(&[(2, "NounGroup := !(noun det)")]).is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(PhraseGrammar::parse_lines(&[(7, "NounGroup := (noun")]).unwrap_err().line, 7);
        assert_eq!(PhraseGrammar::parse_lines(&[(3, "Blob := noun")]).unwrap_err().line, 3);
        assert_eq!(PhraseGrammar::parse_lines(&[(4, "NounGroup := frob")]).unwrap_err().line, 4);
    }

    #[test]
    fn builtin_grammar_loads() {
        assert!(!PhraseGrammar::builtin().is_empty());
    }
}
