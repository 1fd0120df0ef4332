use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::rulefile::{statements, LineError};

/// `link TIE-UP.Activity -> ACTIVITY when Joint Venture Company ~ Company`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRule {
    pub from_type: String,
    pub slot: String,
    pub to_type: String,
    /// Slot pairs (from-slot, to-slot) whose fills must corefer; empty means always.
    pub when: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// Heads of vague descriptions ("company"), which yield to precise ones.
    pub vague: BTreeSet<String>,
    /// Subsumption edges, parent to child, with `_` read as a space.
    pub hierarchy: Vec<(String, String)>,
    /// Slots whose proper names must overlap before two structures merge.
    pub name_overlap: BTreeMap<String, Vec<String>>,
    /// Slots that must be identical when both are filled.
    pub exact: BTreeMap<String, Vec<String>>,
    pub links: Vec<LinkRule>,
    /// Largest sentence distance at which identity merging is attempted.
    pub max_distance: Option<usize>,
}

fn term(s: &str) -> String {
    s.trim().replace('_', " ").to_lowercase()
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
}

impl MergeConfig {
    fn parse_statement(&mut self, line: usize, stmt: &str) -> Result<(), LineError> {
        let err = |m: &str| LineError::new(line, format!("{m}: `{stmt}`"));
        let (head, body) = stmt.split_once(':').ok_or_else(|| err("expected `keyword: ...`"))?;
        let head = head.trim();
        let mut words = head.splitn(2, ' ');
        let keyword = words.next().unwrap_or_default();
        let arg = words.next().map(str::trim);
        match (keyword, arg) {
            ("vague", None) => self.vague.extend(list(body).iter().map(|w| term(w))),
            ("nearness", None) => {
                let n = body.trim().parse().map_err(|_| err("nearness needs a sentence count"))?;
                self.max_distance = Some(n);
            }
            ("hierarchy", None) => self.parse_hierarchy(body).ok_or_else(|| err("malformed hierarchy"))?,
            ("names", Some(ty)) => self.name_overlap.entry(ty.to_string()).or_default().extend(list(body)),
            ("exact", Some(ty)) => self.exact.entry(ty.to_string()).or_default().extend(list(body)),
            _ => return Err(err("unknown merge statement")),
        }
        Ok(())
    }

    /// `a > b > c` chains and `a > {b, c}` fan-outs.
    fn parse_hierarchy(&mut self, body: &str) -> Option<()> {
        let levels: Vec<Vec<String>> = body
            .split('>')
            .map(|lvl| {
                let lvl = lvl.trim();
                match lvl.strip_prefix('{').and_then(|x| x.strip_suffix('}')) {
                    Some(inner) => list(inner).iter().map(|t| term(t)).collect(),
                    None => vec![term(lvl)],
                }
            })
            .collect();
        if levels.len() < 2 || levels.iter().flatten().any(|t| t.is_empty()) {
            return None;
        }
        for pair in levels.windows(2) {
            for parent in &pair[0] {
                for child in &pair[1] {
                    self.hierarchy.push((parent.clone(), child.clone()));
                }
            }
        }
        Some(())
    }

    fn parse_link(&mut self, line: usize, stmt: &str) -> Result<(), LineError> {
        let err = || LineError::new(line, format!("malformed link: `{stmt}`"));
        let rest = stmt.strip_prefix("link ").ok_or_else(err)?;
        let (lhs, rhs) = rest.split_once("->").ok_or_else(err)?;
        let (from_type, slot) = lhs.trim().split_once('.').ok_or_else(err)?;
        let (to_type, cond) = match rhs.split_once(" when ") {
            Some((t, c)) => (t.trim(), Some(c)),
            None => (rhs.trim(), None),
        };
        let mut when = Vec::new();
        for pair in cond.into_iter().flat_map(|c| c.split(',')) {
            let (a, b) = pair.split_once('~').ok_or_else(err)?;
            when.push((a.trim().to_string(), b.trim().to_string()));
        }
        if from_type.is_empty() || slot.trim().is_empty() || to_type.is_empty() {
            return Err(err());
        }
        self.links.push(LinkRule {
            from_type: from_type.trim().to_string(),
            slot: slot.trim().to_string(),
            to_type: to_type.to_string(),
            when,
        });
        Ok(())
    }

    /// Parses a MERGE section body.
    pub fn parse_section(lines: &[(usize, &str)]) -> Result<MergeConfig, LineError> {
        let mut cfg = MergeConfig::default();
        cfg.extend(lines)?;
        Ok(cfg)
    }

    pub fn extend(&mut self, lines: &[(usize, &str)]) -> Result<(), LineError> {
        for (line, stmt) in statements(lines) {
            if stmt.starts_with("link ") {
                self.parse_link(line, &stmt)?;
            } else {
                self.parse_statement(line, &stmt)?;
            }
        }
        Ok(())
    }

    /// Is `child` at or below `ancestor` in the hierarchy?
    pub fn subsumes(&self, ancestor: &str, child: &str) -> bool {
        let mut frontier = vec![child.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(t) = frontier.pop() {
            if t == ancestor {
                return true;
            }
            if seen.insert(t.clone()) {
                frontier.extend(self.hierarchy.iter().filter(|(_, c)| *c == t).map(|(p, _)| p.clone()));
            }
        }
        false
    }

    /// Distance from the root of the hierarchy; deeper terms are more precise.
    pub fn depth(&self, t: &str) -> usize {
        self.hierarchy
            .iter()
            .filter(|(_, c)| c == t)
            .map(|(p, _)| 1 + self.depth(p))
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> BTreeSet<&str> {
        self.hierarchy.iter().flat_map(|(p, c)| [p.as_str(), c.as_str()]).collect()
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn print(&self) -> String {
        let mut out = String::new();
        let under = |t: &str| t.replace(' ', "_");
        if !self.vague.is_empty() {
            out.push_str(&format!("vague: {}\n", self.vague.iter().cloned().collect::<Vec<_>>().join(", ")));
        }
        for (p, c) in &self.hierarchy {
            out.push_str(&format!("hierarchy: {} > {}\n", under(p), under(c)));
        }
        for (ty, slots) in &self.name_overlap {
            out.push_str(&format!("names {ty}: {}\n", slots.join(", ")));
        }
        for (ty, slots) in &self.exact {
            out.push_str(&format!("exact {ty}: {}\n", slots.join(", ")));
        }
        for l in &self.links {
            out.push_str(&format!("link {}.{} -> {}", l.from_type, l.slot, l.to_type));
            if !l.when.is_empty() {
                let conds: Vec<String> = l.when.iter().map(|(a, b)| format!("{a} ~ {b}")).collect();
                out.push_str(&format!(" when {}", conds.join(", ")));
            }
            out.push('\n');
        }
        if let Some(n) = self.max_distance {
            out.push_str(&format!("nearness: {n}\n"));
        }
        out
    }
}
