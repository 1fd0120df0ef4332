//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod support;

use std::collections::BTreeSet;
use std::time::Instant;

use cascade_ie::merger::{compatible, merge_pair};
use cascade_ie::pipeline::{run_corpus, run_document, DocumentResult, Engine};
use cascade_ie::scorer::{f_score, Counts, Normalization, ScoreReport};
use cascade_ie::template::TemplateStructure;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;
use support::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn golden_worked_example() -> Outcome {
    let engine = jv();
    let text = bridgestone();
    let start = Instant::now();
    let result = run_document("bridgestone", &text, &engine, false);
    let elapsed = start.elapsed().as_secs_f64();
    let gold: Vec<TemplateStructure> = serde_json::from_str::<Vec<Value>>(&read("tests/golden/bridgestone_templates.json"))
        .map_err(|e| e.to_string())?
        .iter()
        .map(|v| TemplateStructure::from_json(v).unwrap())
        .collect();
    let norm = Normalization::default();
    let key = |t: &TemplateStructure| {
        let slots: Vec<(String, Vec<String>)> = t
            .slots
            .iter()
            .map(|(k, v)| (k.clone(), v.elements().iter().map(|e| norm.apply(e.to_json().as_str().unwrap_or_default())).collect()))
            .collect();
        (t.id.clone(), t.template_type.clone(), slots)
    };
    let mut got: Vec<_> = result.templates.iter().map(key).collect();
    let mut want: Vec<_> = gold.iter().map(key).collect();
    got.sort();
    want.sort();
    ensure(got == want, format!("templates differ:\n got {got:?}\nwant {want:?}"))?;
    ensure(elapsed < 1.0, format!("took {elapsed:.3}s"))?;
    Ok(format!("TIE-UP-1 and ACTIVITY-1 match slot for slot in {:.1} ms", elapsed * 1000.0))
}

fn jv() -> Engine {
    engine("joint_venture")
}

fn stage2_lines(result: &DocumentResult, sentence: usize) -> String {
    let record = result.trace.iter().find(|r| r.stage == "stage2" && r.sentence == Some(sentence)).expect("stage2 record");
    record.data["phrases"]
        .as_array()
        .expect("phrases")
        .iter()
        .map(|p| format!("{}: {}\n", p["kind"].as_str().unwrap(), p["text"].as_str().unwrap()))
        .collect()
}

fn golden_stage2() -> Outcome {
    let result = run_document("bridgestone", &bridgestone(), &jv(), true);
    let got = stage2_lines(&result, 0);
    let want = read("tests/golden/bridgestone_stage2.txt");
    ensure(got == want, format!("stage 2 trace differs:\n{got}"))?;
    Ok(format!("sentence 1 chunks into the {} golden phrases", want.lines().count()))
}

fn golden_stage4() -> Outcome {
    let result = run_document("bridgestone", &bridgestone(), &jv(), false);
    let got: Vec<Value> = result.stage4.iter().map(type_and_slots).collect();
    let want: Vec<Value> = serde_json::from_str(&read("tests/golden/bridgestone_stage4.json")).map_err(|e| e.to_string())?;
    let canonical = |v: &[Value]| serde_json::to_string(v).unwrap();
    ensure(canonical(&got) == canonical(&want), format!("stage 4 differs: {}", canonical(&got)))?;
    Ok(format!("{} pre-merge structures equal the golden JSON", got.len()))
}

/// Singular, article-free product head: "The cars" and "car" both give "car".
fn product_head(s: &str) -> String {
    let last = s.split_whitespace().last().unwrap_or_default().to_lowercase();
    last.strip_suffix('s').map_or(last.clone(), str::to_string)
}

fn manufacture_pairs(e: &Engine, sentence: &str) -> Vec<(String, String, TemplateStructure)> {
    run_document("s", sentence, e, false)
        .stage4
        .into_iter()
        .filter(|t| t.template_type == "MANUFACTURE")
        .map(|t| (slot(&t, "Agent").unwrap_or_default(), product_head(&slot(&t, "Product").unwrap_or_default()), t))
        .collect()
}

fn expansion_suite() -> Outcome {
    let e = engine("manufacture");
    let mut checked = 0;
    let paraphrases = lines("tests/data/gm_paraphrases.txt");
    let adjuncts = lines("tests/data/gm_adjuncts.txt");
    for s in paraphrases.iter().chain(&adjuncts) {
        let pairs = manufacture_pairs(&e, s);
        ensure(!pairs.is_empty(), format!("no match: {s}"))?;
        for (agent, product, _) in &pairs {
            ensure(agent == "General Motors" && product == "car", format!("{s}: got ({agent}, {product})"))?;
        }
        checked += 1;
    }
    let first = |s: &str, name: &str| manufacture_pairs(&e, s).iter().find_map(|(_, _, t)| slot(t, name));
    ensure(first(&adjuncts[0], "Date").as_deref() == Some("last year"), "date not extracted")?;
    ensure(first(&adjuncts[1], "Place").as_deref() == Some("Michigan"), "place not extracted")?;
    ensure(first(&adjuncts[2], "Place").as_deref() == Some("California; Tennessee"), "coordinated place not extracted")?;
    let distractors = lines("tests/data/gm_distractors.txt");
    let false_matches: Vec<&String> = distractors.iter().filter(|s| !manufacture_pairs(&e, s).is_empty()).collect();
    ensure(distractors.len() == 20, "expected 20 distractors")?;
    ensure(false_matches.is_empty(), format!("false matches: {false_matches:?}"))?;
    Ok(format!("{checked} variants bind (GM, cars); date and place extracted; 0/20 distractors match"))
}

fn premerge(e: &Engine, text: &str) -> Vec<TemplateStructure> {
    let r = run_document("s", text, e, false);
    r.stage4.into_iter().chain(r.seeds).collect()
}

fn nondeterminism_suite() -> Outcome {
    let e = engine("terrorism");
    let mayor = premerge(&e, "The mayor, who was kidnapped yesterday, was found dead today.");
    let incident = |ts: &[TemplateStructure], kind: &str| {
        ts.iter().find(|t| slot(t, "Incident Type").as_deref() == Some(kind)).cloned()
    };
    let kidnap = incident(&mayor, "KIDNAPPING").ok_or("no kidnapping")?;
    let death = incident(&mayor, "DEATH").ok_or("no death")?;
    ensure(slot(&kidnap, "Target") == slot(&death, "Target"), "targets differ")?;
    ensure(slot(&kidnap, "Date").as_deref() == Some("yesterday") && slot(&death, "Date").as_deref() == Some("today"), "dates")?;
    let cristiani = premerge(
        &e,
        "Salvadoran President-elect Alfredo Cristiani condemned the terrorist killing of Attorney General \
         Roberto Garcia Alvarado and accused the Farabundo Marti National Liberation Front (FMLN) of the crime.",
    );
    let killing = incident(&cristiani, "MURDER").ok_or("no killing")?;
    ensure(slot(&killing, "Target").is_some_and(|t| t.contains("Garcia")), "killing target")?;
    let accusation = cristiani.iter().find(|t| t.template_type == "ACCUSATION").ok_or("no accusation")?;
    ensure(slot(accusation, "Accuser").is_some_and(|a| a.contains("Cristiani")), "accuser")?;
    ensure(slot(accusation, "Accused").is_some_and(|a| a.contains("Liberation Front")), "accused")?;
    Ok("mayor: kidnapping and death; Cristiani: killing and accusation".into())
}

fn scorer_exactness() -> Outcome {
    let r = ScoreReport::from_counts(Counts { correct: 60, possible: 100, actual: 80 }, 1.0).map_err(|e| e.to_string())?;
    ensure(r.recall == 0.60 && r.precision == 0.75, format!("R={} P={}", r.recall, r.precision))?;
    let f1 = f_score(0.75, 0.60, 1.0).map_err(|e| e.to_string())?;
    ensure((f1 - 0.6667).abs() <= 1e-4, format!("F={f1}"))?;
    let f2 = f_score(0.55, 0.44, 1.0).map_err(|e| e.to_string())?;
    ensure((f2 - 0.489).abs() <= 0.001, format!("F={f2}"))?;
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    runner
        .run(&(0.0f64..=1.0, 0.01f64..10.0), |(x, beta)| {
            prop_assert!((f_score(x, x, beta).unwrap() - x).abs() < 1e-9);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("R=0.60 P=0.75; F={f1:.4}; F={f2:.4}; F(x,x,b)=x on 100 cases"))
}

fn merger_properties() -> Outcome {
    let cfg = merge_config();
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&(arb_structure(), arb_structure()), |(a, b)| {
            let aa = merge_pair(&a, &a, &cfg).expect("self-merge");
            prop_assert_eq!(canon(&aa), canon(&a));
            prop_assert_eq!(compatible(&a, &b, &cfg), compatible(&b, &a, &cfg));
            match (merge_pair(&a, &b, &cfg), merge_pair(&b, &a, &cfg)) {
                (Ok(ab), Ok(ba)) => {
                    prop_assert_eq!(canon(&ab), canon(&ba));
                    prop_assert_eq!(&ab.modality, &ba.modality);
                    let names: BTreeSet<&String> = a.slots.keys().chain(b.slots.keys()).collect();
                    prop_assert_eq!(names, ab.slots.keys().collect::<BTreeSet<_>>());
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "merge_pair succeeded in one order only"),
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let party = |names: &[&str]| {
        let mut t = TemplateStructure::new(TYPE);
        let items = names.iter().map(|n| cascade_ie::template::SlotValue::Text(cascade_ie::template::Fill::name(*n, None)));
        t.slots.insert("Party".into(), cascade_ie::template::SlotValue::List(items.collect()));
        t
    };
    let disjoint = (party(&["Acme Corp."]), party(&["Bolt Inc."]));
    let overlapping = (party(&["Acme Corp.", "Bolt Inc."]), party(&["Bolt Inc.", "Crane Co."]));
    ensure(!compatible(&disjoint.0, &disjoint.1, &cfg), "disjoint names merged")?;
    ensure(compatible(&overlapping.0, &overlapping.1, &cfg), "overlapping names blocked")?;
    Ok("1000 random pairs: idempotent, commutative, symmetric, slot-preserving; name overlap blocks".into())
}

fn throughput() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = bridgestone();
    for i in 0..100 {
        std::fs::write(dir.path().join(format!("doc{i:03}.txt")), &text).map_err(|e| e.to_string())?;
    }
    let report = run_corpus(dir.path(), &jv(), Some(out.path())).map_err(|e| e.to_string())?;
    ensure(report.errors.is_empty() && report.documents.len() == 100, "corpus run incomplete")?;
    let first = std::fs::read_to_string(out.path().join("doc000.json")).map_err(|e| e.to_string())?;
    for i in 1..100 {
        let other = std::fs::read_to_string(out.path().join(format!("doc{i:03}.json"))).map_err(|e| e.to_string())?;
        ensure(other == first, format!("doc{i:03} differs"))?;
    }
    let wpm = report.words_per_minute;
    ensure(wpm >= 2375.0, format!("{wpm:.0} words/minute"))?;
    Ok(format!("{:.0} words/minute over {} words", wpm, report.words))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden worked example", golden_worked_example),
        ("golden stage 2 trace", golden_stage2),
        ("golden stage 4 structures", golden_stage4),
        ("transformation expansion", expansion_suite),
        ("nondeterminism", nondeterminism_suite),
        ("scorer exactness", scorer_exactness),
        ("merger properties", merger_properties),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {}. {name}: {detail}", i + 1),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {}. {name}: panicked", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
