//! Recall, precision and F-score of response templates against gold ones.
//!
//! A "right answer" is one slot fill; list slots contribute one fill per
//! element. Templates of the same type are aligned greedily, best overlap
//! first. References (`ref:ACTIVITY-1`) are correct when they point at the
//! gold template aligned with the response's target.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::template::{SlotValue, TemplateSchema, TemplateStructure};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("beta must be positive, got {0}")]
    Beta(f64),
    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("{side} template {index}: {message}")]
    Schema { side: &'static str, index: usize, message: String },
    #[error("cannot read templates: {0}")]
    Parse(String),
}

/// Fill-level string normalization applied before comparing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalization {
    pub lowercase: bool,
    pub strip_quotes: bool,
    pub strip_articles: bool,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization { lowercase: true, strip_quotes: true, strip_articles: true }
    }
}

impl Normalization {
    pub fn apply(&self, s: &str) -> String {
        let quote = |c: char| matches!(c, '"' | '\'' | '`' | '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}');
        let mut s = s.split_whitespace().collect::<Vec<_>>().join(" ");
        if self.strip_quotes {
            s = s.trim_matches(quote).to_string();
        }
        if self.lowercase {
            s = s.to_lowercase();
        }
        if self.strip_articles {
            for article in ["a ", "an ", "the ", "A ", "An ", "The "] {
                if let Some(rest) = s.strip_prefix(article) {
                    s = rest.to_string();
                    break;
                }
            }
        }
        s
    }
}

/// (β²+1)PR / (β²P+R), zero when the denominator is.
pub fn f_score(precision: f64, recall: f64, beta: f64) -> Result<f64, ScoreError> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(ScoreError::Beta(beta));
    }
    for (name, value) in [("precision", precision), ("recall", recall)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ScoreError::OutOfRange { name, value });
        }
    }
    let b2 = beta * beta;
    let denominator = b2 * precision + recall;
    Ok(if denominator == 0.0 { 0.0 } else { (b2 + 1.0) * precision * recall / denominator })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub correct: usize,
    pub possible: usize,
    pub actual: usize,
}

impl Counts {
    fn add(&mut self, other: Counts) {
        self.correct += other.correct;
        self.possible += other.possible;
        self.actual += other.actual;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub correct: usize,
    pub possible: usize,
    pub actual: usize,
    pub recall: f64,
    pub precision: f64,
    pub beta: f64,
    pub f_score: f64,
    /// Set when `actual` is 0 and precision is reported as 0.
    pub precision_undefined: bool,
    /// Keyed `TYPE.Slot`.
    pub per_slot: BTreeMap<String, Counts>,
}

impl ScoreReport {
    pub fn from_counts(counts: Counts, beta: f64) -> Result<ScoreReport, ScoreError> {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let recall = ratio(counts.correct, counts.possible);
        let precision = ratio(counts.correct, counts.actual);
        Ok(ScoreReport {
            correct: counts.correct,
            possible: counts.possible,
            actual: counts.actual,
            recall,
            precision,
            beta,
            f_score: f_score(precision, recall, beta)?,
            precision_undefined: counts.actual == 0,
            per_slot: BTreeMap::new(),
        })
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.per_slot.keys().map(String::len).max().unwrap_or(4).max(4);
        writeln!(f, "{:<width$}  {:>4} {:>4} {:>4}", "slot", "cor", "pos", "act")?;
        for (slot, c) in &self.per_slot {
            writeln!(f, "{slot:<width$}  {:>4} {:>4} {:>4}", c.correct, c.possible, c.actual)?;
        }
        writeln!(f, "{:<width$}  {:>4} {:>4} {:>4}", "total", self.correct, self.possible, self.actual)?;
        let undefined = if self.precision_undefined { " (no response fills)" } else { "" };
        writeln!(f, "recall    {:.4}", self.recall)?;
        writeln!(f, "precision {:.4}{undefined}", self.precision)?;
        write!(f, "F (beta={}) {:.4}", self.beta, self.f_score)
    }
}

/// Normalized fills of one slot, references kept apart.
#[derive(Debug, Default)]
struct SlotFills {
    plain: Vec<String>,
    refs: Vec<String>,
}

fn fills(v: &SlotValue, norm: &Normalization) -> SlotFills {
    let mut out = SlotFills::default();
    for e in v.elements() {
        match e {
            SlotValue::Ref(r) => out.refs.push(r.clone()),
            other => out.plain.push(norm.apply(&other.display())),
        }
    }
    out
}

/// Size of the multiset intersection.
fn overlap(a: &[String], b: &[String]) -> usize {
    let mut rest: Vec<&String> = b.iter().collect();
    a.iter()
        .filter(|x| match rest.iter().position(|y| y == x) {
            Some(i) => {
                rest.swap_remove(i);
                true
            }
            None => false,
        })
        .count()
}

fn content_overlap(g: &TemplateStructure, r: &TemplateStructure, norm: &Normalization) -> usize {
    g.slots
        .iter()
        .filter_map(|(slot, gv)| r.slots.get(slot).map(|rv| overlap(&fills(gv, norm).plain, &fills(rv, norm).plain)))
        .sum()
}

fn check_schema(side: &'static str, ts: &[TemplateStructure], schema: &TemplateSchema) -> Result<(), ScoreError> {
    for (index, t) in ts.iter().enumerate() {
        schema.check(t).map_err(|e| ScoreError::Schema { side, index, message: e.to_string() })?;
    }
    Ok(())
}

/// Greedy best-first alignment: pairs `(gold, response)` of the same type
/// sharing at least one fill, highest overlap first, ties by index.
pub fn align(gold: &[TemplateStructure], response: &[TemplateStructure], norm: &Normalization) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (gi, g) in gold.iter().enumerate() {
        for (ri, r) in response.iter().enumerate() {
            if g.template_type == r.template_type {
                let n = content_overlap(g, r, norm);
                if n > 0 {
                    pairs.push((n, gi, ri));
                }
            }
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut used_g, mut used_r) = (vec![false; gold.len()], vec![false; response.len()]);
    let mut out = Vec::new();
    for (_, gi, ri) in pairs {
        if !used_g[gi] && !used_r[ri] {
            used_g[gi] = true;
            used_r[ri] = true;
            out.push((gi, ri));
        }
    }
    out.sort();
    out
}

fn slot_key(t: &TemplateStructure, slot: &str) -> String {
    format!("{}.{slot}", t.template_type)
}

fn count_all(t: &TemplateStructure, norm: &Normalization, gold_side: bool, per_slot: &mut BTreeMap<String, Counts>) {
    for (slot, v) in &t.slots {
        let f = fills(v, norm);
        let n = f.plain.len() + f.refs.len();
        let c = per_slot.entry(slot_key(t, slot)).or_default();
        if gold_side {
            c.possible += n;
        } else {
            c.actual += n;
        }
    }
}

/// Fill counts with per-slot breakdown.
pub fn align_and_count(
    gold: &[TemplateStructure],
    response: &[TemplateStructure],
    schema: &TemplateSchema,
    norm: &Normalization,
) -> Result<(Counts, BTreeMap<String, Counts>), ScoreError> {
    check_schema("gold", gold, schema)?;
    check_schema("response", response, schema)?;
    let pairs = align(gold, response, norm);
    // Response id → the gold id it stands for.
    let id_map: BTreeMap<&str, &str> = pairs
        .iter()
        .filter_map(|&(gi, ri)| Some((response[ri].id.as_deref()?, gold[gi].id.as_deref()?)))
        .collect();
    let mut per_slot: BTreeMap<String, Counts> = BTreeMap::new();
    let (mut seen_g, mut seen_r) = (vec![false; gold.len()], vec![false; response.len()]);
    for &(gi, ri) in &pairs {
        seen_g[gi] = true;
        seen_r[ri] = true;
        let (g, r) = (&gold[gi], &response[ri]);
        count_all(g, norm, true, &mut per_slot);
        count_all(r, norm, false, &mut per_slot);
        for (slot, gv) in &g.slots {
            let Some(rv) = r.slots.get(slot) else { continue };
            let (gf, rf) = (fills(gv, norm), fills(rv, norm));
            let mapped: Vec<String> =
                rf.refs.iter().filter_map(|x| id_map.get(x.as_str()).map(|s| s.to_string())).collect();
            let correct = overlap(&gf.plain, &rf.plain) + overlap(&gf.refs, &mapped);
            per_slot.entry(slot_key(g, slot)).or_default().correct += correct;
        }
    }
    for g in gold.iter().enumerate().filter(|(i, _)| !seen_g[*i]).map(|(_, g)| g) {
        count_all(g, norm, true, &mut per_slot);
    }
    for r in response.iter().enumerate().filter(|(i, _)| !seen_r[*i]).map(|(_, r)| r) {
        count_all(r, norm, false, &mut per_slot);
    }
    let mut total = Counts::default();
    for c in per_slot.values() {
        total.add(*c);
    }
    Ok((total, per_slot))
}

pub fn score(
    gold: &[TemplateStructure],
    response: &[TemplateStructure],
    schema: &TemplateSchema,
    beta: f64,
    norm: &Normalization,
) -> Result<ScoreReport, ScoreError> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(ScoreError::Beta(beta));
    }
    let (counts, per_slot) = align_and_count(gold, response, schema, norm)?;
    let mut report = ScoreReport::from_counts(counts, beta)?;
    report.per_slot = per_slot;
    Ok(report)
}

/// Templates from a JSON array, a single template object, or an object with a
/// `templates` array.
pub fn parse_templates(text: &str) -> Result<Vec<TemplateStructure>, ScoreError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ScoreError::Parse(e.to_string()))?;
    let items = match &v {
        Value::Array(a) => a.clone(),
        Value::Object(o) => match o.get("templates") {
            Some(Value::Array(a)) => a.clone(),
            _ => vec![v.clone()],
        },
        _ => return Err(ScoreError::Parse("expected a template array".into())),
    };
    items.iter().map(|t| TemplateStructure::from_json(t).map_err(ScoreError::Parse)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::Fill;
    use proptest::prelude::*;

    fn text(s: &str) -> SlotValue {
        SlotValue::Text(Fill::description(s, None))
    }

    fn schema() -> TemplateSchema {
        let mut s = TemplateSchema::default();
        s.types.insert("TIE-UP".into(), ["Entities", "Activity", "Amount"].map(String::from).to_vec());
        s.types.insert("ACTIVITY".into(), ["Activity", "Product"].map(String::from).to_vec());
        s
    }

    fn gold() -> Vec<TemplateStructure> {
        let mut t = TemplateStructure::new("TIE-UP")
            .with_slot("Entities", SlotValue::List(vec![text("Bridgestone Sports Co."), text("a local concern")]))
            .with_slot("Activity", SlotValue::Ref("ACTIVITY-1".into()));
        t.id = Some("TIE-UP-1".into());
        let mut a = TemplateStructure::new("ACTIVITY")
            .with_slot("Activity", SlotValue::Symbol("PRODUCTION".into()))
            .with_slot("Product", text("golf clubs"));
        a.id = Some("ACTIVITY-1".into());
        vec![t, a]
    }

    #[test]
    fn recall_and_precision_from_counts() {
        let r = ScoreReport::from_counts(Counts { correct: 60, possible: 100, actual: 80 }, 1.0).unwrap();
        assert!((r.recall - 0.60).abs() < 1e-12);
        assert!((r.precision - 0.75).abs() < 1e-12);
    }

    #[test]
    fn f_score_values() {
        // 2 * 0.75 * 0.60 / 1.35
        let expected = 0.9 / 1.35;
        assert!((f_score(0.75, 0.60, 1.0).unwrap() - expected).abs() < 1e-12);
        assert!((f_score(0.55, 0.44, 1.0).unwrap() - 0.4889).abs() < 5e-5);
        assert_eq!(f_score(0.0, 0.0, 2.0).unwrap(), 0.0);
        assert!(matches!(f_score(0.5, 0.5, 0.0), Err(ScoreError::Beta(_))));
        assert!(matches!(f_score(0.5, 0.5, -1.0), Err(ScoreError::Beta(_))));
        assert!(f_score(1.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn self_comparison_is_perfect() {
        let g = gold();
        let r = score(&g, &g, &schema(), 1.0, &Normalization::default()).unwrap();
        assert_eq!((r.correct, r.possible, r.actual), (5, 5, 5));
        assert_eq!((r.recall, r.precision, r.f_score), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_response_reports_zero_with_flag() {
        let r = score(&gold(), &[], &schema(), 1.0, &Normalization::default()).unwrap();
        assert_eq!((r.correct, r.possible, r.actual), (0, 5, 0));
        assert!(r.precision_undefined);
        assert_eq!((r.recall, r.precision, r.f_score), (0.0, 0.0, 0.0));
    }

    #[test]
    fn normalization_ignores_case_quotes_and_articles() {
        let n = Normalization::default();
        assert_eq!(n.apply("\"The  Local Concern\""), n.apply("local concern"));
        let strict = Normalization { lowercase: false, strip_quotes: false, strip_articles: false };
        assert_ne!(strict.apply("The concern"), strict.apply("concern"));
    }

    #[test]
    fn references_follow_the_alignment() {
        let mut response = gold();
        response[1].id = Some("ACTIVITY-7".into());
        response[0].slots.insert("Activity".into(), SlotValue::Ref("ACTIVITY-7".into()));
        let r = score(&gold(), &response, &schema(), 1.0, &Normalization::default()).unwrap();
        assert_eq!(r.correct, 5);
        response[0].slots.insert("Activity".into(), SlotValue::Ref("ACTIVITY-9".into()));
        let r = score(&gold(), &response, &schema(), 1.0, &Normalization::default()).unwrap();
        assert_eq!(r.correct, 4);
    }

    #[test]
    fn unaligned_templates_count_as_missing_or_spurious() {
        let extra = TemplateStructure::new("ACTIVITY").with_slot("Product", text("tires"));
        let mut response = gold();
        response.push(extra);
        let r = score(&gold(), &response, &schema(), 1.0, &Normalization::default()).unwrap();
        assert_eq!((r.correct, r.possible, r.actual), (5, 5, 6));
        assert_eq!(r.per_slot["ACTIVITY.Product"], Counts { correct: 1, possible: 1, actual: 2 });
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let bad = vec![TemplateStructure::new("TIE-UP").with_slot("Color", text("red"))];
        assert!(matches!(
            score(&gold(), &bad, &schema(), 1.0, &Normalization::default()),
            Err(ScoreError::Schema { side: "response", .. })
        ));
        let unknown = vec![TemplateStructure::new("MERGER")];
        assert!(score(&unknown, &[], &schema(), 1.0, &Normalization::default()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = gold();
        let json = Value::Array(g.iter().map(TemplateStructure::to_json).collect()).to_string();
        let back = parse_templates(&json).unwrap();
        let r = score(&g, &back, &schema(), 1.0, &Normalization::default()).unwrap();
        assert_eq!(r.f_score, 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn beta_one_is_harmonic_mean(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            let f = f_score(p, r, 1.0).unwrap();
            let h = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
            prop_assert!((f - h).abs() < 1e-12);
        }

        #[test]
        fn equal_precision_and_recall(x in 0.0f64..=1.0, beta in 0.01f64..10.0) {
            prop_assert!((f_score(x, x, beta).unwrap() - x).abs() < 1e-9);
        }

        #[test]
        fn increasing_in_each_argument(
            p in 0.01f64..0.99, r in 0.01f64..0.99, d in 0.001f64..0.01, beta in 0.1f64..5.0
        ) {
            let f = f_score(p, r, beta).unwrap();
            prop_assert!(f_score(p + d, r, beta).unwrap() > f);
            prop_assert!(f_score(p, r + d, beta).unwrap() > f);
        }

        #[test]
        fn bounded(p in 0.0f64..=1.0, r in 0.0f64..=1.0, beta in 0.01f64..10.0) {
            let f = f_score(p, r, beta).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }

        #[test]
        fn permutation_invariant(shift in 0usize..3, products in prop::collection::vec("[a-z]{1,6}", 1..5)) {
            let g: Vec<TemplateStructure> = products
                .iter()
                .map(|p| TemplateStructure::new("ACTIVITY").with_slot("Product", text(p)))
                .collect();
            let mut r: Vec<TemplateStructure> = g.iter().take(g.len().saturating_sub(1).max(1)).cloned().collect();
            let k = shift % r.len();
            r.rotate_left(k);
            let mut g2 = g.clone();
            g2.reverse();
            let n = Normalization::default();
            let a = score(&g, &r, &schema(), 1.0, &n).unwrap();
            let b = score(&g2, &r, &schema(), 1.0, &n).unwrap();
            prop_assert_eq!((a.correct, a.possible, a.actual), (b.correct, b.possible, b.actual));
        }
    }
}
