use proptest::prelude::*;

use super::*;
use crate::tokenizer::{contextual_name_typing, recognize_entities, tokenize, ContextRules, Lexicon};

fn lexicon() -> &'static Lexicon {
    use std::sync::OnceLock;
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(Lexicon::builtin)
}

fn phrases(text: &str) -> Vec<Phrase> {
    let toks = tokenize(text, lexicon());
    let mentions = recognize_entities(&toks, lexicon());
    let mentions = contextual_name_typing(&toks, &mentions, &ContextRules::default());
    chunk(&toks, &mentions)
}

fn labelled(text: &str) -> Vec<(String, String)> {
    phrases(text).into_iter().map(|p| (p.kind.label().to_string(), p.text)).collect()
}

fn units_of(text: &str) -> Vec<Unit> {
    let p = phrases(text);
    assert_eq!(p.len(), 1, "{text}: {p:?}");
    p[0].units.clone()
}

#[test]
fn first_sample_sentence_segmentation() {
    let text = "Bridgestone Sports Co. said Friday it had set up a joint venture in Taiwan with a local \
                concern and a Japanese trading house to produce golf clubs to be shipped to Japan.";
    let expected = [
        ("Company Name", "Bridgestone Sports Co."),
        ("Verb Group", "said"),
        ("Noun Group", "Friday"),
        ("Noun Group", "it"),
        ("Verb Group", "had set up"),
        ("Noun Group", "a joint venture"),
        ("Preposition", "in"),
        ("Location", "Taiwan"),
        ("Preposition", "with"),
        ("Noun Group", "a local concern"),
        ("Conjunction", "and"),
        ("Noun Group", "a Japanese trading house"),
        ("Verb Group", "to produce"),
        ("Noun Group", "golf clubs"),
        ("Verb Group", "to be shipped"),
        ("Preposition", "to"),
        ("Location", "Japan"),
    ];
    let got = labelled(text);
    let want: Vec<(String, String)> = expected.iter().map(|(k, t)| (k.to_string(), t.to_string())).collect();
    assert_eq!(got, want);
}

#[test]
fn noun_group_examples_are_single_groups() {
    for (text, head) in [
        ("approximately 5 kg", "kg"),
        ("more than 30 people", "people"),
        ("the newly elected president", "president"),
        ("the largest leftist political force", "force"),
        ("a government and commercial project", "project"),
    ] {
        let p = phrases(text);
        assert_eq!(p.len(), 1, "{text}: {p:?}");
        assert_eq!(p[0].kind, PhraseKind::NounGroup);
        assert_eq!(p[0].text, text);
        assert_eq!(p[0].head_unit().text, head);
        assert!(p[0].span.contains(&p[0].head_unit().span));
    }
}

#[test]
fn temporal_nouns_head_their_own_group() {
    let got = labelled("Several men kidnapped the mayor today.");
    let texts: Vec<&str> = got.iter().map(|(_, t)| t.as_str()).collect();
    assert_eq!(texts, ["Several men", "kidnapped", "the mayor", "today"]);
}

#[test]
fn empty_input_has_no_phrases() {
    assert!(phrases("").is_empty());
}

#[test]
fn voice_tags() {
    let vg = |text: &str| tag_verb_group(&units_of(text)).unwrap().voice_tag;
    assert_eq!(vg("kidnapped"), VoiceTag::ActivePassive);
    assert_eq!(vg("had set up"), VoiceTag::Active);
    assert_eq!(vg("to be shipped"), VoiceTag::Passive);
    assert_eq!(vg("to produce"), VoiceTag::Infinitive);
    assert_eq!(vg("were released"), VoiceTag::Passive);
    assert_eq!(vg("had been kidnapped"), VoiceTag::Passive);
    assert_eq!(vg("manufactures"), VoiceTag::Active);
    assert_eq!(vg("forming"), VoiceTag::Gerund);
    assert_eq!(vg("will form"), VoiceTag::Active);
}

#[test]
fn to_be_participle_keeps_infinitive_start() {
    let f = tag_verb_group(&units_of("to be shipped")).unwrap();
    assert!(f.to_infinitive);
    assert_eq!(f.auxiliaries, ["to", "be"]);
}

#[test]
fn predicate_adjective_is_a_verb_group() {
    let p = phrases("The mayor, who was kidnapped yesterday, was found dead today.");
    let vg: Vec<&Phrase> = p.iter().filter(|p| p.kind == PhraseKind::VerbGroup).collect();
    assert_eq!(vg.len(), 2);
    assert_eq!(vg[1].text, "was found dead");
    let f = vg[1].verb.as_ref().unwrap();
    assert!(f.is_predicate_adjective);
    assert_eq!(vg[1].head_unit().text, "dead");
}

#[test]
fn negation_is_flagged() {
    let f = tag_verb_group(&units_of("did not form")).unwrap();
    assert!(f.negated);
    assert_eq!(f.voice_tag, VoiceTag::Active);
}

#[test]
fn be_to_constructions() {
    let f = tag_verb_group(&units_of("is to manufacture")).unwrap();
    assert!(f.be_to);
    assert_eq!(f.voice_tag, VoiceTag::Active);
    let f = tag_verb_group(&units_of("are to be manufactured")).unwrap();
    assert!(f.be_to);
    assert_eq!(f.voice_tag, VoiceTag::Passive);
}

#[test]
fn rejects_non_verb_groups() {
    let units = vec![Unit::synthetic("the", &[WordClass::Det]), Unit::synthetic("dog", &[WordClass::Noun])];
    assert!(tag_verb_group(&units).is_err());
    assert_eq!(tag_verb_group(&[]), Err(VerbGroupError::Empty));
}

#[test]
fn mentions_become_special_noun_groups() {
    let p = phrases("The joint venture, Bridgestone Sports Taiwan Co., capitalized at 20 million new Taiwan dollars");
    let kinds: Vec<PhraseKind> = p.iter().map(|p| p.kind).collect();
    assert_eq!(
        kinds,
        [
            PhraseKind::NounGroup,
            PhraseKind::Comma,
            PhraseKind::CompanyName,
            PhraseKind::Comma,
            PhraseKind::VerbGroup,
            PhraseKind::Preposition,
            PhraseKind::Currency,
        ]
    );
    assert_eq!(p[4].voice(), Some(VoiceTag::ActivePassive));
}

#[test]
fn quoted_modifiers_stay_inside_the_group() {
    let p = phrases("production of 20,000 iron and \"metal wood\" clubs a month");
    let texts: Vec<&str> = p.iter().map(|p| p.text.as_str()).collect();
    assert_eq!(texts, ["production", "of", "20,000 iron and \"metal wood\" clubs", "a month"]);
}

#[test]
fn no_phrase_contains_another() {
    let p = phrases(
        "Salvadoran President-elect Alfredo Cristiani condemned the terrorist killing of Attorney General \
         Roberto Garcia Alvarado and accused the Farabundo Marti National Liberation Front (FMLN) of the crime.",
    );
    for a in &p {
        for b in &p {
            assert!(a.span == b.span || !a.span.contains(&b.span), "{a:?} contains {b:?}");
        }
    }
}

const WORDS: &[&str] = &[
    "the", "a", "company", "GM", "cars", "manufactures", "were", "manufactured", "by", "in", "Taiwan", "and",
    "joint", "venture", "to", "produce", "golf", "clubs", "said", "Friday", "it", "has", "set", "up", ",",
    "which", "local", "concern", "20", "million", "dollars", "Zorp",
];

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..12).prop_map(|w| format!("{}.", w.join(" ")))
}

fn shifted(p: &Phrase, by: usize, tok_by: usize) -> (PhraseKind, usize, usize, usize, usize, String) {
    (p.kind, p.span.start + by, p.span.end + by, p.tokens.start + tok_by, p.tokens.end + tok_by, p.text.clone())
}

proptest! {
    #[test]
    fn chunking_is_sentence_local(a in sentence(), b in sentence()) {
        let joined = format!("{a} {b}");
        let whole: Vec<_> = phrases(&joined).iter().map(|p| shifted(p, 0, 0)).collect();
        let ntoks = tokenize(&a, lexicon()).len();
        let mut parts: Vec<_> = phrases(&a).iter().map(|p| shifted(p, 0, 0)).collect();
        parts.extend(phrases(&b).iter().map(|p| shifted(p, a.len() + 1, ntoks)));
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn every_verb_group_has_one_voice_and_no_subsumption(a in sentence()) {
        let p = phrases(&a);
        for x in &p {
            prop_assert_eq!(x.kind == PhraseKind::VerbGroup, x.verb.is_some());
            prop_assert!(x.span.contains(&x.head_unit().span));
            for y in &p {
                prop_assert!(x.span == y.span || !x.span.contains(&y.span));
            }
        }
        let spans: Vec<_> = p.iter().map(|x| (x.span.start, x.span.end)).collect();
        let mut sorted = spans.clone();
        sorted.sort();
        prop_assert_eq!(spans, sorted);
    }
}
