use super::*;
use crate::complex_phraser::{build_complex_phrases, collapse_verb_groups};
use crate::phrase_chunker::chunk_with;
use crate::pipeline::{run_document, tokenize_sentence, Engine};
use crate::tokenizer::{contextual_name_typing, recognize_entities};
use proptest::prelude::*;
use std::sync::LazyLock;

const JV: &str = include_str!("../../data/joint_venture.rules");
const MANUFACTURE: &str = include_str!("../../data/manufacture.rules");
const TERRORISM: &str = include_str!("../../data/terrorism.rules");

fn engine(text: &str) -> Engine {
    Engine::from_rules_text(text).unwrap()
}

fn stage3(e: &Engine, text: &str) -> Vec<ComplexPhrase> {
    let tokens = tokenize_sentence(text, Span::new(0, text.len()), &e.lexicon);
    let mentions = recognize_entities(&tokens, &e.lexicon);
    let mentions = contextual_name_typing(&tokens, &mentions, &e.context);
    collapse_verb_groups(build_complex_phrases(chunk_with(&e.grammar, &tokens, &mentions)), &e.rules.verb_groups, &e.rules.classes)
}

fn structures(e: &Engine, text: &str) -> Vec<TemplateStructure> {
    match_sentence(&stage3(e, text), &e.patterns, 0)
}

fn slot(t: &TemplateStructure, name: &str) -> Option<String> {
    t.slots.get(name).map(|v| v.display())
}

#[test]
fn tie_up_over_conjoined_partners() {
    let e = engine(JV);
    let text = "Bridgestone Sports Co. said Friday it has set up a joint venture in Taiwan with a local concern \
                and a Japanese trading house to produce golf clubs to be shipped to Japan.";
    let ts = structures(&e, text);
    let types: Vec<&str> = ts.iter().map(|t| t.template_type.as_str()).collect();
    assert_eq!(types, ["TIE-UP", "ACTIVITY"]);
    let entities: Vec<String> = ts[0].slots["Entities"].elements().into_iter().map(|v| v.display()).collect();
    assert_eq!(entities, ["Bridgestone Sports Co.", "a local concern", "a Japanese trading house"]);
    assert_eq!(slot(&ts[1], "Product").as_deref(), Some("golf clubs"));
    assert!(ts[1].provenance[0].subject_missing);
    assert!(!ts[0].provenance[0].subject_missing);
}

#[test]
fn conjoined_verbs_share_subject_and_object() {
    let e = engine(TERRORISM);
    let ts = structures(&e, "Terrorists kidnapped and killed three people.");
    let kinds: BTreeSet<String> = ts.iter().filter_map(|t| slot(t, "Incident Type")).collect();
    assert_eq!(kinds, BTreeSet::from(["KIDNAPPING".to_string(), "MURDER".to_string()]));
    for t in &ts {
        assert_eq!(slot(t, "Perpetrator").as_deref(), Some("Terrorists"), "{t:?}");
        assert_eq!(slot(t, "Target").as_deref(), Some("three people"), "{t:?}");
    }
}

#[test]
fn active_reading_subsumes_the_passive() {
    let e = engine(TERRORISM);
    let (matches, stats) = find_matches(&stage3(&e, "Several men kidnapped the mayor."), &e.patterns);
    assert_eq!(matches.len(), 1, "{matches:?}");
    assert!(matches[0].rule_name.ends_with("#active"));
    assert!(stats.passive_subsumed >= 1);
}

#[test]
fn relative_clause_adjuncts_stay_with_their_clause() {
    let e = engine(TERRORISM);
    let ts = structures(&e, "The mayor, who was kidnapped yesterday, was found dead today.");
    let date = |kind: &str| {
        ts.iter().find(|t| slot(t, "Incident Type").as_deref() == Some(kind)).and_then(|t| slot(t, "Date"))
    };
    assert_eq!(date("KIDNAPPING").as_deref(), Some("yesterday"));
    assert_eq!(date("DEATH").as_deref(), Some("today"));
}

#[test]
fn one_structure_per_clause_with_several_places() {
    let e = engine(MANUFACTURE);
    let ts = structures(&e, "GM in Tokyo in Taipei in Detroit manufactures cars.");
    assert_eq!(ts.len(), 1);
    assert_eq!(slot(&ts[0], "Place").as_deref(), Some("Tokyo"));
}

#[test]
fn skip_schemata_respect_the_bound() {
    let e = engine(MANUFACTURE);
    let places = ["Tokyo", "Taipei", "Detroit", "Japan", "China", "Korea", "Taiwan", "Michigan", "Tennessee"];
    let text = format!("GM in {} manufactures cars.", places.join(" in "));
    let cps = stage3(&e, &text);
    let branch = MatchBranch {
        state: 0,
        pos: 1,
        start: 0,
        bindings: BTreeMap::new(),
        skipped: 0,
        date: None,
        place: None,
        resolutions: Vec::new(),
        modality: None,
    };
    let out = apply_pseudo_syntax(&branch, &cps);
    assert!(!out.is_empty());
    assert!(out.iter().all(|b| b.pos > 1 && b.pos - 1 <= MAX_SKIP));
    // 18 phrases of prepositional material: the verb is out of reach of one skip.
    let verb = cps.iter().position(|c| c.kind() == PhraseKind::VerbGroup).unwrap();
    assert!(verb - 1 > MAX_SKIP);
    assert!(out.iter().all(|b| b.pos != verb));
}

#[test]
fn empty_sentence_has_no_matches() {
    let e = engine(JV);
    let (m, stats) = find_matches(&[], &e.patterns);
    assert!(m.is_empty());
    assert_eq!(stats, MatchStats::default());
}

#[test]
fn modality_follows_the_verb_group() {
    let e = engine(JV);
    let planned = structures(&e, "GM will set up a joint venture with Toyota.");
    assert_eq!(planned[0].modality.as_deref(), Some("Planned"));
    let existing = structures(&e, "GM has set up a joint venture with Toyota.");
    assert_eq!(existing[0].modality.as_deref(), Some("Existing"));
}

#[test]
fn pipeline_stage4_matches_direct_matching() {
    let e = engine(TERRORISM);
    let text = "Several men kidnapped the mayor.";
    let direct = structures(&e, text);
    let r = run_document("d", text, &e, false);
    assert_eq!(r.stage4.len(), direct.len());
}

static COMBINED: LazyLock<Engine> = LazyLock::new(|| engine(&format!("{JV}\n{TERRORISM}")));

const WORDS: [&str; 22] = [
    "GM", "Toyota", "the", "mayor", "terrorists", "kidnapped", "killed", "was", "by", "and", ",", "who", "in",
    "Tokyo", "yesterday", "set", "up", "a", "joint", "venture", "with", "cars",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn filtering_only_removes(words in prop::collection::vec(prop::sample::select(WORDS.to_vec()), 1..14)) {
        let e = &*COMBINED;
        let cps = stage3(e, &words.join(" "));
        let all = accepting_branches(&cps, &e.patterns);
        let (kept, stats) = filter_matches(all.clone(), &e.patterns);
        prop_assert_eq!(stats.accepting_branches, all.len());
        prop_assert_eq!(kept.len() + stats.passive_subsumed + stats.family_subsumed, all.len());
        for m in &kept {
            prop_assert!(all.contains(m));
            prop_assert!(m.start < m.end && m.end <= cps.len());
        }
    }

    #[test]
    fn matching_is_deterministic(words in prop::collection::vec(prop::sample::select(WORDS.to_vec()), 1..14)) {
        let e = &*COMBINED;
        let cps = stage3(e, &words.join(" "));
        prop_assert_eq!(find_matches(&cps, &e.patterns), find_matches(&cps, &e.patterns));
    }
}
