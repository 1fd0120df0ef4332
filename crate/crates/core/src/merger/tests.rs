use std::collections::BTreeMap;

use super::*;
use crate::template::{DateFill, Provenance};
use crate::tokenizer::Span;
use proptest::prelude::*;

fn name(t: &str, at: usize) -> SlotValue {
    SlotValue::Text(Fill::name(t, Some(Span::new(at, at + t.len()))))
}

fn desc(t: &str, at: usize) -> SlotValue {
    SlotValue::Text(Fill::description(t, Some(Span::new(at, at + t.len()))))
}

fn date(qualifier: Option<&str>, value: &str) -> SlotValue {
    SlotValue::Date(DateFill { qualifier: qualifier.map(String::from), value: value.into(), date: None, span: None })
}

fn structure(ty: &str, sentence: usize, slots: &[(&str, SlotValue)]) -> TemplateStructure {
    let mut t = TemplateStructure::new(ty);
    for (k, v) in slots {
        t.slots.insert(k.to_string(), v.clone());
    }
    t.provenance.push(Provenance {
        sentence,
        span: Span::new(sentence * 100, sentence * 100 + 5),
        rule: "R".into(),
        subject_missing: false,
    });
    t
}

fn config() -> MergeConfig {
    let text = "vague: company, firm, concern\n\
                hierarchy: golf_clubs > {iron clubs, metal wood clubs}\n\
                names TIE-UP: Entities\n\
                exact ACTIVITY: Activity\n\
                link TIE-UP.Activity -> ACTIVITY when Joint Venture Company ~ Company\n";
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    MergeConfig::parse_section(&lines).unwrap()
}

fn schema() -> TemplateSchema {
    let mut s = TemplateSchema::default();
    s.types.insert("TIE-UP".into(), ["Entities", "Joint Venture Company", "Activity"].map(String::from).to_vec());
    s.types.insert("ACTIVITY".into(), ["Activity", "Company", "Product"].map(String::from).to_vec());
    s
}

#[test]
fn config_statements() {
    let cfg = config();
    assert!(cfg.vague.contains("concern"));
    assert!(cfg.subsumes("golf clubs", "iron clubs"));
    assert!(!cfg.subsumes("iron clubs", "golf clubs"));
    assert_eq!(cfg.links[0].when, [("Joint Venture Company".to_string(), "Company".to_string())]);
    assert!(MergeConfig::parse_section(&[(3, "bogus: x")]).unwrap_err().to_string().contains("line 3"));
    assert!(MergeConfig::parse_section(&[(1, "hierarchy: a")]).is_err());
}

#[test]
fn distributed_description_terms() {
    assert_eq!(description_terms("iron and \"metal wood\" clubs"), ["iron clubs", "metal wood clubs"]);
    assert_eq!(description_terms("the golf clubs"), ["golf clubs"]);
    assert_eq!(description_terms("a local concern"), ["local concern"]);
}

#[test]
fn vague_yields_to_precise() {
    let cfg = config();
    let got = merge_fill(&desc("the company", 0), &name("Bridgestone Sports Taiwan Co.", 50), &cfg).unwrap();
    assert_eq!(got.display(), "Bridgestone Sports Taiwan Co.");
    let got = merge_fill(&desc("the firm", 0), &desc("a golf club maker", 9), &cfg).unwrap();
    assert_eq!(got.display(), "a golf club maker");
}

#[test]
fn hierarchy_keeps_the_more_specific_description() {
    let cfg = config();
    let got = merge_fill(&desc("golf clubs", 0), &desc("iron and \"metal wood\" clubs", 20), &cfg).unwrap();
    assert_eq!(got.display(), "iron and \"metal wood\" clubs");
    assert!(merge_fill(&desc("iron clubs", 0), &desc("tires", 20), &cfg).is_none());
}

#[test]
fn distinct_names_block() {
    let cfg = config();
    assert!(merge_fill(&name("Toyota", 0), &name("Honda", 10), &cfg).is_none());
    let a = structure("TIE-UP", 0, &[("Entities", name("Toyota", 0))]);
    let b = structure("TIE-UP", 1, &[("Entities", name("Honda", 100))]);
    assert_eq!(check(&a, &b, &cfg).unwrap_err(), "slot Entities: names do not overlap");
}

#[test]
fn overlapping_names_merge_lists() {
    let cfg = config();
    let a = structure("TIE-UP", 0, &[("Entities", SlotValue::List(vec![name("Toyota", 0), desc("a local concern", 20)]))]);
    let b = structure("TIE-UP", 1, &[("Entities", name("Toyota", 100))]);
    let m = merge_pair(&a, &b, &cfg).unwrap();
    assert_eq!(m.slots["Entities"].elements().len(), 2);
    assert_eq!(m.provenance.len(), 2);
}

#[test]
fn qualified_date_wins() {
    let cfg = config();
    let got = merge_fill(&date(None, "January 1990"), &date(Some("DURING"), "January 1990"), &cfg).unwrap();
    assert_eq!(got.display(), "DURING: January 1990");
    assert!(merge_fill(&date(None, "January 1990"), &date(None, "March 1991"), &cfg).is_none());
}

#[test]
fn type_modality_and_exact_slots_block() {
    let cfg = config();
    let a = structure("ACTIVITY", 0, &[("Activity", SlotValue::Symbol("PRODUCTION".into()))]);
    let b = structure("ACTIVITY", 1, &[("Activity", SlotValue::Symbol("SALES".into()))]);
    assert!(check(&a, &b, &cfg).unwrap_err().contains("exact"));
    assert!(check(&a, &structure("TIE-UP", 0, &[]), &cfg).unwrap_err().contains("types differ"));
    let (mut p, mut q) = (a.clone(), a.clone());
    p.modality = Some("Planned".into());
    q.modality = Some("Existing".into());
    assert!(!compatible(&p, &q, &cfg));
    let err = merge_pair(&p, &q, &cfg).unwrap_err();
    assert!(err.to_string().starts_with("cannot merge ACTIVITY with ACTIVITY"));
}

#[test]
fn document_merge_ids_links_and_audit() {
    let cfg = config();
    let jv = name("Bridgestone Sports Taiwan Co.", 120);
    let input = vec![
        structure("TIE-UP", 0, &[("Entities", name("Bridgestone Sports Co.", 0))]),
        structure("ACTIVITY", 0, &[("Activity", SlotValue::Symbol("PRODUCTION".into())), ("Product", desc("golf clubs", 40))]),
        structure("TIE-UP", 1, &[("Joint Venture Company", jv.clone())]),
        structure("ACTIVITY", 1, &[("Company", jv.clone())]),
    ];
    let out = merge_document(input, Vec::new(), &cfg, &schema());
    let ids: Vec<&str> = out.templates.iter().filter_map(|t| t.id.as_deref()).collect();
    assert_eq!(ids, ["ACTIVITY-1", "TIE-UP-1"]);
    let tie = &out.templates[1];
    assert_eq!(tie.slots["Activity"], SlotValue::Ref("ACTIVITY-1".into()));
    assert_eq!(tie.slots.keys().collect::<Vec<_>>(), ["Entities", "Joint Venture Company", "Activity"]);
    let verdicts: Vec<(String, String, Verdict)> =
        out.audit.iter().map(|d| (d.left.clone(), d.right.clone(), d.verdict)).collect();
    assert!(verdicts.contains(&("#0".into(), "#2".into(), Verdict::Merge)));
    assert!(verdicts.contains(&("#1".into(), "#3".into(), Verdict::Merge)));
    assert!(verdicts.contains(&("TIE-UP-1".into(), "ACTIVITY-1".into(), Verdict::Link)));
}

#[test]
fn link_condition_blocks_unrelated_targets() {
    let cfg = config();
    let input = vec![
        structure("TIE-UP", 0, &[("Joint Venture Company", name("Acme Co.", 0))]),
        structure("ACTIVITY", 0, &[("Company", name("Bolt Inc.", 30))]),
    ];
    let out = merge_document(input, Vec::new(), &cfg, &schema());
    let tie = out.templates.iter().find(|t| t.template_type == "TIE-UP").unwrap();
    assert!(!tie.slots.contains_key("Activity"));
    assert!(out.audit.iter().any(|d| d.verdict == Verdict::Block && d.reason.contains("corefer")));
}

#[test]
fn nearness_bound() {
    let mut cfg = config();
    cfg.max_distance = Some(1);
    let a = structure("ACTIVITY", 0, &[("Product", desc("golf clubs", 0))]);
    let b = structure("ACTIVITY", 3, &[("Company", name("Acme Co.", 300))]);
    let out = merge_document(vec![a, b], Vec::new(), &cfg, &schema());
    assert_eq!(out.templates.len(), 2);
    assert_eq!(out.audit[0].reason, "beyond nearness bound");
}

fn entity(name: Option<&str>, descriptions: &[&str], sentence: usize) -> EntityStructure {
    EntityStructure {
        entity_type: "Company".into(),
        name: name.map(String::from),
        descriptions: descriptions.iter().map(|d| d.to_string()).collect(),
        attributes: BTreeMap::new(),
        sentence,
        span: Span::new(sentence * 100, sentence * 100 + 3),
    }
}

#[test]
fn entity_coreference() {
    let cfg = config();
    let merged = merge_entities(
        vec![
            entity(Some("Bridgestone Sports Co."), &[], 0),
            entity(None, &["a local concern"], 0),
            entity(None, &["the company"], 1),
            entity(Some("BRIDGESTONE SPORTS CO."), &[], 2),
        ],
        &cfg,
    );
    assert_eq!(merged.len(), 2);
    assert_eq!(merged[0].descriptions, ["the company"]);
    // An indefinite description introduces a new entity.
    assert_eq!(merged[1].descriptions, ["a local concern"]);
}

const NAMES: [&str; 3] = ["Acme Co.", "Bolt Inc.", "Crane Ltd."];
const DESCS: [&str; 6] = ["the company", "a firm", "golf clubs", "iron clubs", "metal wood clubs", "tires"];

fn arb_value() -> impl Strategy<Value = SlotValue> {
    prop_oneof![
        (0..NAMES.len()).prop_map(|i| name(NAMES[i], i * 10)),
        (0..DESCS.len()).prop_map(|i| desc(DESCS[i], 100 + i * 10)),
        prop::collection::btree_set(0..NAMES.len(), 2..=3)
            .prop_map(|ids| SlotValue::List(ids.into_iter().map(|i| name(NAMES[i], i * 10)).collect())),
    ]
}

fn arb_structure() -> impl Strategy<Value = TemplateStructure> {
    (
        prop::option::of(arb_value()),
        prop::option::of(arb_value()),
        prop::option::of(prop::sample::select(vec!["Planned", "Existing"])),
        0usize..4,
    )
        .prop_map(|(e, p, modality, sentence)| {
            let mut t = structure("TIE-UP", sentence, &[]);
            t.slots.extend(e.map(|v| ("Entities".to_string(), v)));
            t.slots.extend(p.map(|v| ("Joint Venture Company".to_string(), v)));
            t.modality = modality.map(String::from);
            t
        })
}

proptest! {
    #[test]
    fn compatibility_is_symmetric(a in arb_structure(), b in arb_structure()) {
        let cfg = config();
        prop_assert_eq!(compatible(&a, &b, &cfg), compatible(&b, &a, &cfg));
    }

    #[test]
    fn merging_is_symmetric(a in arb_structure(), b in arb_structure()) {
        let cfg = config();
        prop_assert_eq!(merge_pair(&a, &b, &cfg).ok(), merge_pair(&b, &a, &cfg).ok());
    }

    #[test]
    fn merging_with_itself_is_identity(a in arb_structure()) {
        let mut a = a;
        a.id = None;
        prop_assert_eq!(merge_pair(&a, &a, &config()).unwrap(), a);
    }

    #[test]
    fn merged_structure_absorbs_both(a in arb_structure(), b in arb_structure()) {
        let cfg = config();
        if let Ok(m) = merge_pair(&a, &b, &cfg) {
            for k in a.slots.keys().chain(b.slots.keys()) {
                prop_assert!(m.slots.contains_key(k));
            }
            prop_assert!(compatible(&m, &a, &cfg));
        }
    }

    #[test]
    fn document_merge_conserves_provenance(ts in prop::collection::vec(arb_structure(), 0..8)) {
        let mut want: Vec<Provenance> = ts.iter().flat_map(|t| t.provenance.clone()).collect();
        let out = merge_document(ts.clone(), Vec::new(), &config(), &schema());
        prop_assert!(out.templates.len() <= ts.len());
        let mut got: Vec<Provenance> = out.templates.iter().flat_map(|t| t.provenance.clone()).collect();
        want.sort();
        want.dedup();
        got.sort();
        got.dedup();
        prop_assert_eq!(got, want);
        let ids: std::collections::BTreeSet<_> = out.templates.iter().map(|t| t.id.clone().unwrap()).collect();
        prop_assert_eq!(ids.len(), out.templates.len());
    }
}
