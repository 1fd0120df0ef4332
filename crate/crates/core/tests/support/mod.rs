#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use cascade_ie::merger::{fill_key, MergeConfig};
use cascade_ie::pipeline::Engine;
use cascade_ie::template::{Fill, Provenance, SlotValue, TemplateStructure};
use cascade_ie::tokenizer::Span;
use proptest::prelude::*;

pub fn crate_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(crate_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn lines(rel: &str) -> Vec<String> {
    read(rel).lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect()
}

pub fn engine(domain: &str) -> Engine {
    Engine::from_rules_text(&read(&format!("data/{domain}.rules"))).unwrap_or_else(|e| panic!("{domain}: {e}"))
}

pub fn bridgestone() -> String {
    read("data/texts/bridgestone.txt")
}

/// `{"type", "slots"}` of a structure, for comparison with hand-written goldens.
pub fn type_and_slots(t: &TemplateStructure) -> serde_json::Value {
    let v = t.to_json();
    serde_json::json!({ "type": v["type"], "slots": v["slots"] })
}

pub fn slot(t: &TemplateStructure, name: &str) -> Option<String> {
    t.slots.get(name).map(SlotValue::display)
}

/// Slots as normalized element keys, order-free.
pub fn canon(t: &TemplateStructure) -> BTreeMap<String, Vec<String>> {
    t.slots
        .iter()
        .map(|(k, v)| {
            let mut keys: Vec<String> = v.elements().into_iter().map(fill_key).collect();
            keys.sort();
            (k.clone(), keys)
        })
        .collect()
}

pub const TYPE: &str = "T";
pub const NAMES: [&str; 3] = ["Acme Corp.", "Bolt Inc.", "Crane Co."];
pub const DESCRIPTIONS: [&str; 6] = ["a company", "the firm", "golf clubs", "iron clubs", "metal wood clubs", "tires"];

pub fn merge_config() -> MergeConfig {
    let mut cfg = MergeConfig::default();
    cfg.vague.extend(["company", "firm"].map(String::from));
    cfg.hierarchy.push(("golf clubs".into(), "iron clubs".into()));
    cfg.hierarchy.push(("golf clubs".into(), "metal wood clubs".into()));
    cfg.name_overlap.insert(TYPE.into(), vec!["Party".into()]);
    cfg.exact.insert(TYPE.into(), vec!["Kind".into()]);
    cfg
}

fn name(i: usize) -> SlotValue {
    SlotValue::Text(Fill::name(NAMES[i], Some(Span::new(i * 20, i * 20 + 9))))
}

fn arb_party() -> impl Strategy<Value = SlotValue> {
    prop::collection::btree_set(0..NAMES.len(), 1..=2).prop_map(|ids| {
        let mut items: Vec<SlotValue> = ids.into_iter().map(name).collect();
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            SlotValue::List(items)
        }
    })
}

fn arb_description() -> impl Strategy<Value = SlotValue> {
    (0..DESCRIPTIONS.len()).prop_map(|i| SlotValue::Text(Fill::description(DESCRIPTIONS[i], Some(Span::new(200 + i, 210 + i)))))
}

/// Small structures of one type over a fixed vocabulary: a name-overlap slot,
/// a description slot, an exact symbol slot and an optional modality.
pub fn arb_structure() -> impl Strategy<Value = TemplateStructure> {
    (
        prop::option::of(arb_party()),
        prop::option::of(arb_description()),
        prop::option::of(prop::sample::select(vec!["A", "B"])),
        prop::option::of(prop::sample::select(vec!["Planned", "Existing"])),
        0usize..4,
    )
        .prop_map(|(party, desc, kind, modality, sentence)| {
            let mut t = TemplateStructure::new(TYPE);
            if let Some(p) = party {
                t.slots.insert("Party".into(), p);
            }
            if let Some(d) = desc {
                t.slots.insert("Object".into(), d);
            }
            if let Some(k) = kind {
                t.slots.insert("Kind".into(), SlotValue::Symbol(k.into()));
            }
            t.modality = modality.map(String::from);
            t.provenance.push(Provenance {
                sentence,
                span: Span::new(sentence * 100, sentence * 100 + 10),
                rule: "R".into(),
                subject_missing: false,
            });
            t
        })
}
