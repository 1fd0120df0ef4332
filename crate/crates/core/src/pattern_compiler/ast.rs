use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::phrase_chunker::{PhraseKind, VoiceTag};
use crate::tokenizer::WordClass;

/// Which phrase kinds a test admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KindTest {
    Kind(PhraseKind),
    /// Plain noun groups and every special noun-group kind.
    Nominal,
    Any,
}

impl KindTest {
    pub fn admits(self, kind: PhraseKind) -> bool {
        match self {
            KindTest::Kind(k) => k == kind,
            KindTest::Nominal => kind.is_nominal(),
            KindTest::Any => true,
        }
    }

    pub fn kinds(self) -> Vec<PhraseKind> {
        PhraseKind::ALL.iter().copied().filter(|k| self.admits(*k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoiceConstraint {
    /// Active, ActivePassive, Infinitive or Gerund.
    Active,
    /// Passive or ActivePassive.
    Passive,
    Gerund,
    Infinitive,
}

impl VoiceConstraint {
    pub fn admits(self, voice: VoiceTag) -> bool {
        use VoiceTag as V;
        match self {
            VoiceConstraint::Active => !matches!(voice, V::Passive),
            VoiceConstraint::Passive => matches!(voice, V::Passive | V::ActivePassive),
            VoiceConstraint::Gerund => voice == V::Gerund,
            VoiceConstraint::Infinitive => voice == V::Infinitive,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            VoiceConstraint::Active => "active",
            VoiceConstraint::Passive => "passive",
            VoiceConstraint::Gerund => "gerund",
            VoiceConstraint::Infinitive => "infinitive",
        }
    }
}

/// Verb-group feature tests written `{active,nobeto,aux=will}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VgOptions {
    pub voice: Option<VoiceConstraint>,
    /// No auxiliaries at all (reduced relatives).
    pub bare: bool,
    pub be_to: Option<bool>,
    pub copula: bool,
    pub adjective: bool,
    pub aux: Option<String>,
}

impl VgOptions {
    pub fn is_empty(&self) -> bool {
        *self == VgOptions::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseTest {
    pub kind: KindTest,
    /// Domain word class the head must belong to.
    pub class: Option<String>,
    /// Test the class's agentive nominal forms instead of its verbs.
    pub nominal_form: bool,
    /// `<Company/ies>`: conjoined phrases are accepted.
    pub plural: bool,
    /// Lowercased surface alternatives; empty means no surface test.
    pub literals: Vec<String>,
    pub options: VgOptions,
    /// Written `<Class>`; the kind then follows from the class's domain.
    pub bracket: bool,
}

impl PhraseTest {
    pub fn kind(kind: KindTest) -> Self {
        PhraseTest {
            kind,
            class: None,
            nominal_form: false,
            plural: false,
            literals: Vec::new(),
            options: VgOptions::default(),
            bracket: false,
        }
    }

    pub fn is_verbal(&self) -> bool {
        self.kind == KindTest::Kind(PhraseKind::VerbGroup)
    }

    pub fn is_nominal(&self) -> bool {
        match self.kind {
            KindTest::Nominal => true,
            KindTest::Kind(k) => k.is_nominal(),
            KindTest::Any => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BindPart {
    Whole,
    /// Prenominal modifiers of the bound noun group ("car" in "a car manufacturer").
    Modifiers,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Binding {
    pub name: String,
    pub part: BindPart,
}

impl Binding {
    pub fn whole(name: impl Into<String>) -> Self {
        Binding { name: name.into(), part: BindPart::Whole }
    }
}

/// Test on an attached sub-phrase: `(of product:NG)`, `(appos name:CompanyName)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Complement {
    /// Preposition surface, or `appos` for appositives.
    pub relation: String,
    pub binding: Option<Binding>,
    pub test: PhraseTest,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub binding: Option<Binding>,
    pub test: PhraseTest,
    pub complement: Option<Complement>,
    pub optional: bool,
}

impl Constraint {
    pub fn new(test: PhraseTest) -> Self {
        Constraint { binding: None, test, complement: None, optional: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SkipSchema {
    /// Dates, times, locations, temporal noun groups, Preposition + noun group
    /// pairs, and comma-delimited parentheticals.
    Adjunct,
    /// `{Preposition NounGroup}*`
    PrepNg,
    /// `{NounGroup | Other}*`: any phrase except verb groups, conjunctions and
    /// relative pronouns.
    NgOther,
}

impl SkipSchema {
    pub fn notation(self) -> &'static str {
        match self {
            SkipSchema::Adjunct => "{Adjunct}*",
            SkipSchema::PrepNg => "{Prep NG}*",
            SkipSchema::NgOther => "{NG|Other}*",
        }
    }
}

pub const MAX_SKIP: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
pub enum PatternElement {
    Constraint(Constraint),
    /// Surface alternatives written `"in"/"on"`.
    Literal { words: Vec<String>, optional: bool },
    Skip(SkipSchema),
    /// Parenthesized alternatives of element sequences.
    Group { alternatives: Vec<Vec<PatternElement>>, optional: bool },
    /// Subject-to-verb skip schemata, applied by the matcher at run time.
    PseudoSyntax,
}

impl PatternElement {
    pub fn constraint(&self) -> Option<&Constraint> {
        match self {
            PatternElement::Constraint(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_optional(&self) -> bool {
        match self {
            PatternElement::Constraint(c) => c.optional,
            PatternElement::Literal { optional, .. } | PatternElement::Group { optional, .. } => *optional,
            PatternElement::Skip(_) | PatternElement::PseudoSyntax => true,
        }
    }

    /// Every binding introduced by this element, in order.
    pub fn bindings(&self) -> Vec<&Binding> {
        match self {
            PatternElement::Constraint(c) => {
                let mut out: Vec<&Binding> = c.binding.iter().collect();
                if let Some(b) = c.complement.as_ref().and_then(|x| x.binding.as_ref()) {
                    out.push(b);
                }
                out
            }
            PatternElement::Group { alternatives, .. } => {
                alternatives.iter().flatten().flat_map(PatternElement::bindings).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    /// Fixed vocabulary symbol such as `PRODUCTION`.
    Symbol(String),
    Literal(String),
    /// Temporal qualifier applied to a date binding: `during(d)`.
    Qualified { qualifier: String, var: String },
    /// The first date skipped by adjunct tolerance.
    Date,
    /// The first location skipped by adjunct tolerance.
    Place,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub template_type: String,
    /// Slot name to concatenated terms (`subj + partner`).
    pub slots: Vec<(String, Vec<Term>)>,
}

impl Action {
    pub fn uses(&self, wanted: &Term) -> bool {
        self.slots.iter().flat_map(|(_, t)| t).any(|t| t == wanted)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.slots.iter().flat_map(|(_, t)| t).filter_map(|t| match t {
            Term::Var(v) | Term::Qualified { var: v, .. } => Some(v.as_str()),
            _ => None,
        })
    }
}

/// Member of the transformation family generated from an S-V-O rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Active,
    Passive,
    SubjectRelative,
    ObjectRelative,
    ReducedRelative,
    IsToActive,
    IsToPassive,
    AgentiveNominal,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Active,
        Variant::Passive,
        Variant::SubjectRelative,
        Variant::ObjectRelative,
        Variant::ReducedRelative,
        Variant::IsToActive,
        Variant::IsToPassive,
        Variant::AgentiveNominal,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            Variant::Active => "active",
            Variant::Passive => "passive",
            Variant::SubjectRelative => "subject-relative",
            Variant::ObjectRelative => "object-relative",
            Variant::ReducedRelative => "reduced-relative",
            Variant::IsToActive => "is-to-active",
            Variant::IsToPassive => "is-to-passive",
            Variant::AgentiveNominal => "agentive-nominal",
        }
    }

    /// Voice class used for passive-subsumption filtering.
    pub fn is_passive(self) -> bool {
        matches!(self, Variant::Passive | Variant::ObjectRelative | Variant::ReducedRelative | Variant::IsToPassive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternRule {
    pub name: String,
    pub elements: Vec<PatternElement>,
    pub action: Action,
    pub expand: bool,
    pub modality_filter: Option<String>,
    /// Name of the source rule; equal to `name` for unexpanded rules.
    pub family: String,
    pub variant: Option<Variant>,
    /// Variable holding the logical subject, when the rule has one.
    pub subject: Option<String>,
    pub line: usize,
}

impl PatternRule {
    pub fn bindings(&self) -> Vec<&Binding> {
        self.elements.iter().flat_map(PatternElement::bindings).collect()
    }

    /// True when the rule contains a verb-group constraint.
    pub fn has_verb(&self) -> bool {
        fn any_verb(elements: &[PatternElement]) -> bool {
            elements.iter().any(|e| match e {
                PatternElement::Constraint(c) => c.test.is_verbal(),
                PatternElement::Group { alternatives, .. } => alternatives.iter().any(|a| any_verb(a)),
                _ => false,
            })
        }
        any_verb(&self.elements)
    }
}

/// Subject variable of an unexpanded rule: the binding of a leading nominal
/// constraint directly followed by a verb-group constraint.
pub fn leading_subject(elements: &[PatternElement]) -> Option<String> {
    let mut cs = elements.iter().filter(|e| !matches!(e, PatternElement::Skip(_) | PatternElement::PseudoSyntax));
    let first = cs.next()?.constraint()?;
    let second = cs.next()?.constraint()?;
    if first.test.is_nominal() && second.test.is_verbal() {
        first.binding.as_ref().map(|b| b.name.clone())
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassDomain {
    /// `NG Company = ...`: tested against noun-group heads.
    Noun,
    /// `VG Set-up = ...`: tested against verb-group heads.
    Verb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainClass {
    pub name: String,
    pub domain: ClassDomain,
    /// Head lemmas, lowercase; multiwords separated by single spaces.
    pub words: Vec<String>,
    /// `@CompanyName`: every phrase of the kind belongs.
    pub kinds: Vec<PhraseKind>,
    /// `%temporal`: heads carrying the lexical class belong.
    pub word_classes: Vec<WordClass>,
    /// `*`: every head belongs.
    pub any: bool,
    /// `nominal: manufacturer`: agentive nominal forms of a verb class.
    pub nominal: Vec<String>,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainClasses {
    pub classes: IndexMap<String, DomainClass>,
}

impl DomainClasses {
    pub fn get(&self, name: &str) -> Option<&DomainClass> {
        self.classes.get(name)
    }
}

/// A VERBGROUPS rule: a verb-group-initiated sequence collapsing to one complex
/// verb group carrying `class` and `modality`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceRule {
    pub class: String,
    pub modality: String,
    pub elements: Vec<PatternElement>,
    pub line: usize,
}

/// An ENTITIES rule: phrases passing any test become entity structures of `entity_type`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRule {
    pub entity_type: String,
    pub tests: Vec<PhraseTest>,
    pub line: usize,
}
