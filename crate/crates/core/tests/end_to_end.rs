mod support;

use cascade_ie::pipeline::{run_corpus, run_document};
use cascade_ie::scorer::{parse_templates, score, Normalization};
use support::*;

#[test]
fn extracted_templates_score_perfectly_against_the_golden() {
    let e = engine("joint_venture");
    let result = run_document("bridgestone", &bridgestone(), &e, false);
    let response = parse_templates(&result.templates_json().to_string()).unwrap();
    let gold = parse_templates(&read("tests/golden/bridgestone_templates.json")).unwrap();
    let report = score(&gold, &response, &e.rules.templates, 1.0, &Normalization::default()).unwrap();
    assert!(report.correct == report.possible && report.actual == report.possible);
    assert_eq!(report.f_score, 1.0);
}

#[test]
fn a_missing_slot_costs_recall_only() {
    let e = engine("joint_venture");
    let result = run_document("bridgestone", &bridgestone(), &e, false);
    let mut response = result.templates.clone();
    let activity = response.iter_mut().find(|t| t.template_type == "ACTIVITY").unwrap();
    activity.slots.shift_remove("Start Date").unwrap();
    let gold = parse_templates(&read("tests/golden/bridgestone_templates.json")).unwrap();
    let report = score(&gold, &response, &e.rules.templates, 1.0, &Normalization::default()).unwrap();
    assert_eq!(report.precision, 1.0);
    assert_eq!(report.correct + 1, report.possible);
    assert_eq!(report.per_slot["ACTIVITY.Start Date"].correct, 0);
}

#[test]
fn corpus_output_equals_single_document_runs() {
    let e = engine("terrorism");
    let texts = [
        "Several men kidnapped the mayor yesterday.",
        "The mayor, who was kidnapped yesterday, was found dead today.",
        "Terrorists kidnapped and killed three people.",
        "The weather was mild.",
    ];
    let dir = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    for (i, t) in texts.iter().enumerate() {
        std::fs::write(dir.path().join(format!("d{i}.txt")), t).unwrap();
    }
    let report = run_corpus(dir.path(), &e, Some(out.path())).unwrap();
    assert_eq!(report.documents.len(), texts.len());
    for (i, t) in texts.iter().enumerate() {
        let single = run_document(&format!("d{i}"), t, &e, false).templates_json();
        let written: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.path().join(format!("d{i}.json"))).unwrap()).unwrap();
        assert_eq!(written, single, "{t}");
    }
    assert_eq!(report.documents[3].templates, 0);
}

#[test]
fn separate_clauses_stay_separate() {
    let e = engine("manufacture");
    let r = run_document("d", "GM manufactures cars in Michigan. The weather was mild. Toyota builds trucks.", &e, false);
    let agents: Vec<String> = r.templates.iter().filter_map(|t| slot(t, "Agent")).collect();
    assert_eq!(agents, ["General Motors", "Toyota"]);
    assert_eq!(slot(&r.templates[0], "Place").as_deref(), Some("Michigan"));
}
