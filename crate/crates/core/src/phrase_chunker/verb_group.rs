use crate::tokenizer::WordClass;

use super::{Unit, VerbFeatures, VoiceTag};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerbGroupError {
    #[error("empty verb group")]
    Empty,
    #[error("`{0}` cannot appear in a verb group")]
    Foreign(String),
    #[error("verb group has no main verb")]
    NoMainVerb,
}

fn is_negation(u: &Unit) -> bool {
    matches!(u.lower.as_str(), "not" | "n't" | "never")
}

fn is_adverb(u: &Unit) -> bool {
    u.has(WordClass::Adv) && !u.classes.iter().any(|c| c.is_verbal())
}

fn is_auxiliary(u: &Unit) -> bool {
    u.has(WordClass::Modal)
        || u.has(WordClass::Have)
        || u.has(WordClass::Be)
        || u.has(WordClass::Do)
        || u.lower == "to"
}

fn is_main(u: &Unit) -> bool {
    u.classes.iter().any(|c| c.is_verbal()) || u.has(WordClass::Adj)
}

/// Classifies a verb group: auxiliaries and adverbs followed by a main verb or
/// a predicate adjective.
pub fn tag_verb_group(units: &[Unit]) -> Result<VerbFeatures, VerbGroupError> {
    if units.is_empty() {
        return Err(VerbGroupError::Empty);
    }
    let core: Vec<&Unit> = units.iter().filter(|u| !is_adverb(u) && !is_negation(u)).collect();
    let (main, aux) = core.split_last().ok_or(VerbGroupError::NoMainVerb)?;
    if !is_main(main) {
        return Err(VerbGroupError::NoMainVerb);
    }
    for u in units.iter().filter(|u| !is_adverb(u) && !is_negation(u)) {
        if !(is_auxiliary(u) || is_main(u)) {
            return Err(VerbGroupError::Foreign(u.text.clone()));
        }
    }
    // Everything before the main verb must be an auxiliary, except a
    // participle inside a predicate adjective ("was found dead").
    let predicate_adjective = main.has(WordClass::Adj) && !main.classes.iter().any(|c| c.is_verbal());
    for (i, u) in aux.iter().enumerate() {
        let participle_before_adj = predicate_adjective && i + 1 == aux.len() && u.has(WordClass::Part);
        if !is_auxiliary(u) && !participle_before_adj {
            return Err(VerbGroupError::Foreign(u.text.clone()));
        }
    }

    let auxiliaries: Vec<String> = aux.iter().filter(|u| is_auxiliary(u)).map(|u| u.lower.clone()).collect();
    let to_infinitive = aux.first().is_some_and(|u| u.lower == "to");
    let be_aux = aux.iter().any(|u| u.has(WordClass::Be));
    let be_to = aux.windows(2).any(|w| w[0].has(WordClass::Be) && w[1].lower == "to");
    let copula = main.has(WordClass::Be);

    let passive_participle = if predicate_adjective {
        aux.last().is_some_and(|u| u.has(WordClass::Part)) && be_aux
    } else {
        main.has(WordClass::Part) && be_aux && !main.has(WordClass::Ger)
    };
    let last_aux_is_be = aux.last().is_some_and(|u| u.has(WordClass::Be));
    let voice_tag = if passive_participle && (last_aux_is_be || predicate_adjective) {
        VoiceTag::Passive
    } else if to_infinitive {
        VoiceTag::Infinitive
    } else if aux.is_empty() && !copula {
        let past = main.has(WordClass::Past);
        let part = main.has(WordClass::Part);
        if main.has(WordClass::Ger) && !past {
            VoiceTag::Gerund
        } else if past && part {
            VoiceTag::ActivePassive
        } else if part && !past {
            VoiceTag::Passive
        } else {
            VoiceTag::Active
        }
    } else {
        VoiceTag::Active
    };

    Ok(VerbFeatures {
        voice_tag,
        is_predicate_adjective: predicate_adjective,
        negated: units.iter().any(is_negation),
        to_infinitive,
        be_to,
        copula,
        auxiliaries,
    })
}
