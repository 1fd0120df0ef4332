use std::collections::BTreeSet;

use super::MergeConfig;
use crate::template::{Fill, SlotValue, TemplateStructure};

const DETERMINERS: [&str; 9] = ["a", "an", "the", "this", "that", "these", "those", "its", "their"];

/// Lowercased words of a description without quotes or leading determiners.
fn words(text: &str) -> Vec<String> {
    let cleaned: String = text.chars().filter(|c| !matches!(c, '"' | '\'' | '`')).collect();
    let mut w: Vec<String> = cleaned.split_whitespace().map(str::to_lowercase).collect();
    while w.first().is_some_and(|x| DETERMINERS.contains(&x.as_str())) {
        w.remove(0);
    }
    w
}

/// Hierarchy terms a description denotes. Coordinated modifiers sharing a head
/// distribute: `iron and metal wood clubs` → `iron clubs`, `metal wood clubs`.
pub fn description_terms(text: &str) -> Vec<String> {
    let w = words(text);
    if let Some(k) = w.iter().position(|x| x == "and" || x == "or") {
        if k > 0 && k + 2 < w.len() {
            let head = &w[w.len() - 1];
            let left = [&w[..k], std::slice::from_ref(head)].concat().join(" ");
            let right = w[k + 1..].join(" ");
            return vec![left, right];
        }
    }
    vec![w.join(" ")]
}

/// Normalized comparison key of a fill.
pub fn fill_key(v: &SlotValue) -> String {
    match v {
        SlotValue::Text(f) => words(&f.text).join(" "),
        other => other.display().to_lowercase(),
    }
}

fn vague(cfg: &MergeConfig, term: &str) -> bool {
    cfg.vague.contains(term) || term.rsplit(' ').next().is_some_and(|h| cfg.vague.contains(h))
}

/// Some u in `upper` is at or above every t in `lower`.
fn covers(cfg: &MergeConfig, upper: &[String], lower: &[String]) -> bool {
    lower.iter().all(|t| upper.iter().any(|u| cfg.subsumes(u, t)))
}

/// Deterministic choice between two interchangeable fills.
fn canonical(a: &SlotValue, b: &SlotValue) -> SlotValue {
    let ka = (a.display(), format!("{a:?}"));
    let kb = (b.display(), format!("{b:?}"));
    if ka <= kb { a.clone() } else { b.clone() }
}

fn merge_text(a: &Fill, b: &Fill, va: &SlotValue, vb: &SlotValue, cfg: &MergeConfig) -> Option<SlotValue> {
    match (a.is_name, b.is_name) {
        (true, true) => None,
        (true, false) => Some(va.clone()),
        (false, true) => Some(vb.clone()),
        (false, false) => {
            let (ta, tb) = (description_terms(&a.text), description_terms(&b.text));
            let (a_vague, b_vague) = (ta.iter().all(|t| vague(cfg, t)), tb.iter().all(|t| vague(cfg, t)));
            match (a_vague, b_vague) {
                (true, true) => Some(canonical(va, vb)),
                (true, false) => Some(vb.clone()),
                (false, true) => Some(va.clone()),
                (false, false) if covers(cfg, &tb, &ta) => Some(va.clone()),
                (false, false) if covers(cfg, &ta, &tb) => Some(vb.clone()),
                _ => None,
            }
        }
    }
}

fn merge_single(a: &SlotValue, b: &SlotValue, cfg: &MergeConfig) -> Option<SlotValue> {
    if fill_key(a) == fill_key(b) {
        return Some(match (a, b) {
            (SlotValue::Date(x), SlotValue::Date(y)) if x.qualifier.is_some() != y.qualifier.is_some() => {
                if x.qualifier.is_some() { a.clone() } else { b.clone() }
            }
            _ => canonical(a, b),
        });
    }
    match (a, b) {
        (SlotValue::Text(x), SlotValue::Text(y)) => merge_text(x, y, a, b, cfg),
        (SlotValue::Date(x), SlotValue::Date(y)) if x.value.eq_ignore_ascii_case(&y.value) => {
            match (&x.qualifier, &y.qualifier) {
                (Some(_), None) => Some(a.clone()),
                (None, Some(_)) => Some(b.clone()),
                _ => None,
            }
        }
        _ => None,
    }
}

fn sort_key(v: &SlotValue) -> (usize, String) {
    (v.span().map_or(usize::MAX, |s| s.start), fill_key(v))
}

/// The merged fill of two co-filled slots, or `None` when they conflict.
/// Lists (and a list against a single fill) take the union.
pub fn merge_fill(a: &SlotValue, b: &SlotValue, cfg: &MergeConfig) -> Option<SlotValue> {
    if !matches!(a, SlotValue::List(_)) && !matches!(b, SlotValue::List(_)) {
        return merge_single(a, b, cfg);
    }
    let mut out: Vec<SlotValue> = Vec::new();
    for v in a.elements().into_iter().chain(b.elements()) {
        match out.iter().position(|x| fill_key(x) == fill_key(v)) {
            Some(i) => out[i] = merge_single(&out[i], v, cfg).unwrap_or_else(|| out[i].clone()),
            None => out.push(v.clone()),
        }
    }
    out.sort_by_key(sort_key);
    Some(if out.len() == 1 { out.pop().expect("one") } else { SlotValue::List(out) })
}

fn names(v: &SlotValue) -> BTreeSet<String> {
    v.elements()
        .into_iter()
        .filter_map(|e| match e {
            SlotValue::Text(f) if f.is_name => Some(f.text.to_lowercase()),
            _ => None,
        })
        .collect()
}

/// `Ok` when `a` and `b` may identity-merge, else the reason they may not.
pub fn check(a: &TemplateStructure, b: &TemplateStructure, cfg: &MergeConfig) -> Result<(), String> {
    if a.template_type != b.template_type {
        return Err(format!("types differ: {} vs {}", a.template_type, b.template_type));
    }
    if let (Some(x), Some(y)) = (&a.modality, &b.modality) {
        if x != y {
            return Err(format!("modality differs: {x} vs {y}"));
        }
    }
    let ty = &a.template_type;
    for (slot, va) in &a.slots {
        let Some(vb) = b.slots.get(slot) else { continue };
        if cfg.exact.get(ty).is_some_and(|s| s.contains(slot)) && fill_key(va) != fill_key(vb) {
            return Err(format!("slot {slot}: exact fills differ"));
        }
        if cfg.name_overlap.get(ty).is_some_and(|s| s.contains(slot)) {
            let (na, nb) = (names(va), names(vb));
            if !na.is_empty() && !nb.is_empty() && na.is_disjoint(&nb) {
                return Err(format!("slot {slot}: names do not overlap"));
            }
            if !na.is_empty() && !nb.is_empty() {
                continue;
            }
        }
        if merge_fill(va, vb, cfg).is_none() {
            return Err(format!("slot {slot}: `{}` conflicts with `{}`", va.display(), vb.display()));
        }
    }
    Ok(())
}

pub fn compatible(a: &TemplateStructure, b: &TemplateStructure, cfg: &MergeConfig) -> bool {
    check(a, b, cfg).is_ok()
}
