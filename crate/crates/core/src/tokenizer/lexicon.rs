//! Flat-file lexicon: one entry per line, `surface<TAB>class[,class...][<TAB>key=value;...]`.
//!
//! Multiword entries use spaces in the surface. Regular inflections of verbs and
//! nouns are generated at load time unless the word is already listed; irregular
//! forms can be given explicitly or through the `past=`, `part=`, `ger=`, `pres=`
//! and `plural=` attributes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::split_words;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: expected `surface<TAB>classes`")]
    MissingClasses { line: usize },
    #[error("line {line}: unknown word class `{label}`")]
    UnknownClass { line: usize, label: String },
    #[error("line {line}: malformed attribute `{attr}`")]
    BadAttribute { line: usize, attr: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Word-class labels assigned by the lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordClass {
    Noun,
    /// Base (uninflected) verb form.
    Verb,
    /// Third person singular present.
    Pres,
    Past,
    /// Past participle.
    Part,
    /// Present participle / gerund.
    Ger,
    Adj,
    Adv,
    Det,
    Quant,
    /// Numerical modifiers such as "approximately".
    NumAdv,
    Num,
    Prep,
    Conj,
    RelPro,
    Pron,
    Modal,
    Have,
    Be,
    Do,
    Title,
    FirstName,
    Location,
    Company,
    Designator,
    Currency,
    Temporal,
    Quote,
    Unknown,
}

impl WordClass {
    pub const ALL: [WordClass; 29] = [
        WordClass::Noun,
        WordClass::Verb,
        WordClass::Pres,
        WordClass::Past,
        WordClass::Part,
        WordClass::Ger,
        WordClass::Adj,
        WordClass::Adv,
        WordClass::Det,
        WordClass::Quant,
        WordClass::NumAdv,
        WordClass::Num,
        WordClass::Prep,
        WordClass::Conj,
        WordClass::RelPro,
        WordClass::Pron,
        WordClass::Modal,
        WordClass::Have,
        WordClass::Be,
        WordClass::Do,
        WordClass::Title,
        WordClass::FirstName,
        WordClass::Location,
        WordClass::Company,
        WordClass::Designator,
        WordClass::Currency,
        WordClass::Temporal,
        WordClass::Quote,
        WordClass::Unknown,
    ];

    pub fn label(self) -> &'static str {
        match self {
            WordClass::Noun => "noun",
            WordClass::Verb => "verb",
            WordClass::Pres => "pres",
            WordClass::Past => "past",
            WordClass::Part => "part",
            WordClass::Ger => "ger",
            WordClass::Adj => "adj",
            WordClass::Adv => "adv",
            WordClass::Det => "det",
            WordClass::Quant => "quant",
            WordClass::NumAdv => "numadv",
            WordClass::Num => "num",
            WordClass::Prep => "prep",
            WordClass::Conj => "conj",
            WordClass::RelPro => "relpro",
            WordClass::Pron => "pron",
            WordClass::Modal => "modal",
            WordClass::Have => "have",
            WordClass::Be => "be",
            WordClass::Do => "do",
            WordClass::Title => "title",
            WordClass::FirstName => "firstname",
            WordClass::Location => "location",
            WordClass::Company => "company",
            WordClass::Designator => "designator",
            WordClass::Currency => "currency",
            WordClass::Temporal => "temporal",
            WordClass::Quote => "quote",
            WordClass::Unknown => "unknown",
        }
    }

    /// Closed-class words never start or continue a proper name.
    pub fn is_closed(self) -> bool {
        matches!(
            self,
            WordClass::Det
                | WordClass::Prep
                | WordClass::Conj
                | WordClass::RelPro
                | WordClass::Pron
                | WordClass::Modal
                | WordClass::Have
                | WordClass::Be
                | WordClass::Do
                | WordClass::Quant
        )
    }

    pub fn is_verbal(self) -> bool {
        matches!(
            self,
            WordClass::Verb | WordClass::Pres | WordClass::Past | WordClass::Part | WordClass::Ger
        )
    }
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for WordClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let alias = match s.as_str() {
            "adjective" => "adj",
            "adverb" => "adv",
            "determiner" => "det",
            "preposition" => "prep",
            "conjunction" => "conj",
            "relative-pronoun" => "relpro",
            "pronoun" => "pron",
            "number" => "num",
            "participle" => "part",
            "gerund" => "ger",
            "organization" => "company",
            other => other,
        };
        WordClass::ALL
            .iter()
            .copied()
            .find(|c| c.label() == alias)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexEntry {
    pub classes: BTreeSet<WordClass>,
    /// Nominal/base lemma.
    pub lemma: String,
    /// Lemma of the verb this form inflects, when it differs from `lemma`.
    pub verb_lemma: Option<String>,
    pub attrs: BTreeMap<String, String>,
}

impl LexEntry {
    pub fn has(&self, class: WordClass) -> bool {
        self.classes.contains(&class)
    }

    fn absorb(&mut self, other: LexEntry) {
        self.classes.extend(other.classes);
        if self.verb_lemma.is_none() {
            self.verb_lemma = other.verb_lemma;
        }
        for (k, v) in other.attrs {
            self.attrs.entry(k).or_insert(v);
        }
    }
}

/// An immutable word list shared by every document pipeline.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, LexEntry>,
    /// Longest multiword entry (in words) keyed by its first word.
    multiword_len: HashMap<String, usize>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The word list shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../data/lexicon.tsv")).expect("builtin lexicon")
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::new();
        lex.extend_from_str(text)?;
        Ok(lex)
    }

    pub fn load(paths: &[impl AsRef<Path>]) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::new();
        for p in paths {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p).map_err(|source| LexiconError::Io {
                path: p.display().to_string(),
                source,
            })?;
            lex.extend_from_str(&text)?;
        }
        Ok(lex)
    }

    /// Adds the entries of another lexicon file. Inflections are regenerated
    /// for the newly listed words.
    pub fn extend_from_str(&mut self, text: &str) -> Result<(), LexiconError> {
        let mut explicit = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim_end();
            if body.trim().is_empty() {
                continue;
            }
            let mut cols = body.split('\t');
            let surface = cols.next().unwrap_or("").trim();
            let classes = cols.next().ok_or(LexiconError::MissingClasses { line })?;
            let attrs = cols.next();
            if surface.is_empty() {
                return Err(LexiconError::MissingClasses { line });
            }
            let mut entry = LexEntry::default();
            for label in classes.split(',').filter(|l| !l.trim().is_empty()) {
                let class = label.parse().map_err(|_| LexiconError::UnknownClass {
                    line,
                    label: label.trim().to_string(),
                })?;
                entry.classes.insert(class);
            }
            if entry.classes.is_empty() {
                return Err(LexiconError::MissingClasses { line });
            }
            if let Some(attrs) = attrs {
                for attr in attrs.split(';').map(str::trim).filter(|a| !a.is_empty()) {
                    match attr.split_once('=') {
                        Some((k, v)) if !k.trim().is_empty() => {
                            entry.attrs.insert(k.trim().to_string(), v.trim().to_string());
                        }
                        Some(_) => {
                            return Err(LexiconError::BadAttribute {
                                line,
                                attr: attr.to_string(),
                            })
                        }
                        None => {
                            entry.attrs.insert(attr.to_string(), String::new());
                        }
                    }
                }
            }
            let key = Self::key(surface);
            entry.lemma = entry.attrs.get("lemma").cloned().unwrap_or_else(|| key.clone());
            if entry.classes.iter().any(|c| c.is_verbal()) && !entry.has(WordClass::Verb) {
                entry.verb_lemma = entry.attrs.get("lemma").cloned();
            }
            explicit.push((key, entry));
        }
        for (key, entry) in &explicit {
            self.insert(key.clone(), entry.clone());
        }
        for (key, entry) in explicit {
            for (form, generated) in inflections(&key, &entry) {
                if !self.entries.contains_key(&form) {
                    self.insert(form, generated);
                } else if let Some(existing) = self.entries.get_mut(&form) {
                    // A listed homograph ("killing" the noun) still gains its verb reading.
                    if generated.classes.iter().any(|c| !existing.classes.contains(c)) {
                        existing.absorb(generated);
                    }
                }
            }
        }
        Ok(())
    }

    fn insert(&mut self, key: String, entry: LexEntry) {
        let words: Vec<&str> = key.split(' ').collect();
        if words.len() > 1 {
            let slot = self.multiword_len.entry(words[0].to_string()).or_insert(0);
            *slot = (*slot).max(words.len());
        }
        match self.entries.get_mut(&key) {
            Some(existing) => existing.absorb(entry),
            None => {
                self.entries.insert(key, entry);
            }
        }
    }

    /// Lookup key: the lowercased surface re-tokenized and joined by single spaces.
    pub fn key(surface: &str) -> String {
        split_words(surface)
            .into_iter()
            .map(|(_, w)| w.to_lowercase())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn get(&self, key: &str) -> Option<&LexEntry> {
        self.entries.get(key)
    }

    pub fn lookup(&self, surface: &str) -> Option<&LexEntry> {
        self.entries.get(&Self::key(surface))
    }

    pub fn max_multiword(&self, first: &str) -> usize {
        self.multiword_len.get(first).copied().unwrap_or(1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words whose trailing period does not end a sentence.
    pub fn abbreviations(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .filter(|(_, e)| e.has(WordClass::Designator) || e.attrs.contains_key("abbrev"))
            .map(|(k, _)| k.trim_end_matches(" .").to_string())
            .filter(|k| !k.contains(' '))
            .collect()
    }
}

fn verb_forms(base: &str) -> (String, String, String) {
    let bytes = base.as_bytes();
    let last = bytes.last().copied().unwrap_or(b' ');
    let prev = if bytes.len() >= 2 { bytes[bytes.len() - 2] } else { b' ' };
    let vowel = |c: u8| b"aeiou".contains(&c);
    let pres = if base.ends_with('s')
        || base.ends_with("sh")
        || base.ends_with("ch")
        || base.ends_with('x')
        || base.ends_with('z')
    {
        format!("{base}es")
    } else if last == b'y' && !vowel(prev) {
        format!("{}ies", &base[..base.len() - 1])
    } else {
        format!("{base}s")
    };
    let past = if last == b'e' {
        format!("{base}d")
    } else if last == b'y' && !vowel(prev) {
        format!("{}ied", &base[..base.len() - 1])
    } else {
        format!("{base}ed")
    };
    let ger = if last == b'e' && prev != b'e' && base.len() > 2 {
        format!("{}ing", &base[..base.len() - 1])
    } else {
        format!("{base}ing")
    };
    (pres, past, ger)
}

fn plural(noun: &str) -> String {
    verb_forms(noun).0
}

/// Regular inflected forms of a listed word, keyed by surface.
fn inflections(key: &str, entry: &LexEntry) -> Vec<(String, LexEntry)> {
    let mut out = Vec::new();
    if entry.attrs.contains_key("noinflect") {
        return out;
    }
    let words: Vec<&str> = key.split(' ').collect();
    if entry.has(WordClass::Verb) {
        // Phrasal verbs inflect their first word.
        let (head, rest) = (words[0], &words[1..]);
        let join = |w: &str| {
            std::iter::once(w)
                .chain(rest.iter().copied())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let (pres, past, ger) = verb_forms(head);
        let attr = |name: &str, default: String| {
            entry.attrs.get(name).map(|s| Lexicon::key(s)).unwrap_or_else(|| join(&default))
        };
        let pres = attr("pres", pres);
        let past_form = attr("past", past.clone());
        let part_form = entry
            .attrs
            .get("part")
            .map(|s| Lexicon::key(s))
            .unwrap_or_else(|| past_form.clone());
        let ger = attr("ger", ger);
        let form = |classes: &[WordClass]| LexEntry {
            classes: classes.iter().copied().collect(),
            lemma: key.to_string(),
            verb_lemma: Some(key.to_string()),
            attrs: BTreeMap::new(),
        };
        out.push((pres, form(&[WordClass::Pres])));
        if past_form == part_form {
            out.push((past_form, form(&[WordClass::Past, WordClass::Part])));
        } else {
            out.push((past_form, form(&[WordClass::Past])));
            out.push((part_form, form(&[WordClass::Part])));
        }
        out.push((ger, form(&[WordClass::Ger])));
    }
    if entry.has(WordClass::Noun) && !entry.attrs.contains_key("noplural") {
        let last = words[words.len() - 1];
        let pl_last = entry
            .attrs
            .get("plural")
            .cloned()
            .unwrap_or_else(|| plural(last));
        let mut pl: Vec<&str> = words[..words.len() - 1].to_vec();
        pl.push(&pl_last);
        let mut classes = BTreeSet::from([WordClass::Noun]);
        if entry.has(WordClass::Temporal) {
            classes.insert(WordClass::Temporal);
        }
        if entry.has(WordClass::Title) {
            classes.insert(WordClass::Title);
        }
        out.push((
            pl.join(" "),
            LexEntry {
                classes,
                lemma: key.to_string(),
                verb_lemma: None,
                attrs: entry
                    .attrs
                    .iter()
                    .filter(|(k, _)| k.as_str() == "nationality" || k.as_str() == "subcat")
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
            },
        ));
    }
    out
}
