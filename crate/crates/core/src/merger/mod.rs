//! Stage 5: document-level merging of template structures and entities.
//!
//! Structures are agglomerated greedily in document order. Each new structure
//! is compared against the merged structures of its type, nearest sentence
//! first, and joins the first compatible one. Link rules then fill reference
//! slots across types ("a tie-up implies an activity").

mod compat;
mod config;

use serde::{Deserialize, Serialize};

use crate::complex_phraser::EntityStructure;
use crate::template::{Fill, SlotValue, TemplateSchema, TemplateStructure};

pub use compat::{check, compatible, description_terms, fill_key, merge_fill};
pub use config::{LinkRule, MergeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Merge,
    Block,
    Link,
}

/// One considered pair. Structures are named by their position in the
/// Stage 4 output (`#3`) or, for links, by their final ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeDecision {
    pub left: String,
    pub right: String,
    pub verdict: Verdict,
    pub reason: String,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("cannot merge {left} with {right}: {reason}")]
pub struct MergeError {
    pub left: String,
    pub right: String,
    pub reason: String,
}

/// Slot-wise union of two compatible structures; co-filled slots keep the more
/// precise fill. Provenance is concatenated, sorted and deduplicated.
pub fn merge_pair(a: &TemplateStructure, b: &TemplateStructure, cfg: &MergeConfig) -> Result<TemplateStructure, MergeError> {
    let fail = |reason: String| MergeError { left: a.template_type.clone(), right: b.template_type.clone(), reason };
    check(a, b, cfg).map_err(fail)?;
    let mut out = a.clone();
    for (slot, vb) in &b.slots {
        let merged = match a.slots.get(slot) {
            None => vb.clone(),
            Some(va) => merge_fill(va, vb, cfg).ok_or_else(|| fail(format!("slot {slot} conflicts")))?,
        };
        out.slots.insert(slot.clone(), merged);
    }
    out.modality = a.modality.clone().or_else(|| b.modality.clone());
    out.provenance.extend(b.provenance.iter().cloned());
    out.provenance.sort();
    out.provenance.dedup();
    out.id = None;
    Ok(out)
}

fn sentences(s: &TemplateStructure) -> impl Iterator<Item = usize> + '_ {
    s.provenance.iter().map(|p| p.sentence)
}

fn distance(a: &TemplateStructure, b: &TemplateStructure) -> usize {
    sentences(a).flat_map(|x| sentences(b).map(move |y| x.abs_diff(y))).min().unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeOutcome {
    pub templates: Vec<TemplateStructure>,
    pub entities: Vec<EntityStructure>,
    pub audit: Vec<MergeDecision>,
}

/// Identity merging, id assignment and link filling for one document.
pub fn merge_document(
    structures: Vec<TemplateStructure>,
    entities: Vec<EntityStructure>,
    cfg: &MergeConfig,
    schema: &TemplateSchema,
) -> MergeOutcome {
    let mut audit = Vec::new();
    // Merged structures with the Stage 4 positions they absorbed.
    let mut merged: Vec<(TemplateStructure, Vec<usize>)> = Vec::new();
    for (i, s) in structures.into_iter().enumerate() {
        let mut candidates: Vec<usize> =
            (0..merged.len()).filter(|&j| merged[j].0.template_type == s.template_type).collect();
        candidates.sort_by_key(|&j| (distance(&merged[j].0, &s), merged[j].0.first_position()));
        let mut joined = false;
        for j in candidates {
            let left = label(&merged[j].1);
            let right = format!("#{i}");
            if cfg.max_distance.is_some_and(|d| distance(&merged[j].0, &s) > d) {
                audit.push(MergeDecision { left, right, verdict: Verdict::Block, reason: "beyond nearness bound".into() });
                continue;
            }
            match merge_pair(&merged[j].0, &s, cfg) {
                Ok(m) => {
                    audit.push(MergeDecision { left, right, verdict: Verdict::Merge, reason: "compatible".into() });
                    merged[j].0 = m;
                    merged[j].1.push(i);
                    joined = true;
                    break;
                }
                Err(e) => audit.push(MergeDecision { left, right, verdict: Verdict::Block, reason: e.reason }),
            }
        }
        if !joined {
            merged.push((s, vec![i]));
        }
    }
    let mut templates: Vec<TemplateStructure> = merged.into_iter().map(|(s, _)| s).collect();
    sort_templates(&mut templates);
    assign_ids(&mut templates);
    fill_links(&mut templates, cfg, &mut audit);
    for t in &mut templates {
        schema.order(t);
    }
    MergeOutcome { templates, entities: merge_entities(entities, cfg), audit }
}

fn label(positions: &[usize]) -> String {
    positions.iter().map(|p| format!("#{p}")).collect::<Vec<_>>().join("+")
}

/// Output order: template type, then first provenance position.
pub fn sort_templates(ts: &mut [TemplateStructure]) {
    ts.sort_by(|a, b| (&a.template_type, a.first_position()).cmp(&(&b.template_type, b.first_position())));
}

/// `TYPE-n`, numbered per type in output order.
pub fn assign_ids(ts: &mut [TemplateStructure]) {
    let mut counts: std::collections::BTreeMap<String, usize> = Default::default();
    for t in ts {
        let n = counts.entry(t.template_type.clone()).or_default();
        *n += 1;
        t.id = Some(format!("{}-{n}", t.template_type));
    }
}

/// Inferential coreference: an empty reference slot points at the nearest
/// consistent structure of the target type not already referenced.
fn fill_links(ts: &mut [TemplateStructure], cfg: &MergeConfig, audit: &mut Vec<MergeDecision>) {
    let mut taken: std::collections::BTreeSet<usize> = Default::default();
    for rule in &cfg.links {
        for i in 0..ts.len() {
            if ts[i].template_type != rule.from_type || ts[i].slots.contains_key(&rule.slot) {
                continue;
            }
            let mut targets: Vec<usize> =
                (0..ts.len()).filter(|&j| ts[j].template_type == rule.to_type && !taken.contains(&j)).collect();
            targets.sort_by_key(|&j| (distance(&ts[i], &ts[j]), ts[j].first_position()));
            for j in targets {
                let blocker = rule.when.iter().find(|(fs, tslot)| {
                    matches!((ts[i].slots.get(fs), ts[j].slots.get(tslot)), (Some(x), Some(y)) if merge_fill(x, y, cfg).is_none())
                });
                let (left, right) = (ts[i].id.clone().unwrap_or_default(), ts[j].id.clone().unwrap_or_default());
                if let Some((fs, tslot)) = blocker {
                    let reason = format!("{fs} does not corefer with {tslot}");
                    audit.push(MergeDecision { left, right, verdict: Verdict::Block, reason });
                    continue;
                }
                let reason = format!("{}.{} -> {}", rule.from_type, rule.slot, rule.to_type);
                audit.push(MergeDecision { left, right: right.clone(), verdict: Verdict::Link, reason });
                ts[i].slots.insert(rule.slot.clone(), SlotValue::Ref(right));
                taken.insert(j);
                break;
            }
        }
    }
}

fn definite(description: &str) -> bool {
    let first = description.split_whitespace().next().unwrap_or_default().to_lowercase();
    matches!(first.as_str(), "the" | "this" | "that" | "these" | "those" | "its")
}

/// May `later` be another mention of `earlier`? Equal names; a definite
/// description of a named entity ("the company"); or definite descriptions
/// related by precision.
fn corefer(earlier: &EntityStructure, later: &EntityStructure, cfg: &MergeConfig) -> bool {
    if earlier.entity_type != later.entity_type {
        return false;
    }
    let described = |e: &EntityStructure| e.descriptions.iter().all(|d| definite(d));
    match (&earlier.name, &later.name) {
        (Some(a), Some(b)) => a.eq_ignore_ascii_case(b),
        (Some(_), None) => !later.descriptions.is_empty() && described(later),
        (None, Some(_)) => false,
        (None, None) => {
            !later.descriptions.is_empty()
                && described(later)
                && earlier.descriptions.iter().any(|d| {
                    later.descriptions.iter().any(|l| {
                        let (a, b) = (Fill::description(d.clone(), None), Fill::description(l.clone(), None));
                        merge_fill(&SlotValue::Text(a), &SlotValue::Text(b), cfg).is_some()
                    })
                })
        }
    }
}

/// Entities merge under the name/description rules, nearest earlier first.
pub fn merge_entities(entities: Vec<EntityStructure>, cfg: &MergeConfig) -> Vec<EntityStructure> {
    let mut out: Vec<EntityStructure> = Vec::new();
    for e in entities {
        let target = out
            .iter()
            .enumerate()
            .filter(|(_, x)| cfg.max_distance.is_none_or(|d| e.sentence.abs_diff(x.sentence) <= d))
            .filter(|(_, x)| corefer(x, &e, cfg))
            .min_by_key(|(_, x)| (e.sentence.abs_diff(x.sentence), std::cmp::Reverse(x.span.start)))
            .map(|(i, _)| i);
        match target {
            Some(i) => {
                let x = &mut out[i];
                if x.name.is_none() {
                    x.name = e.name;
                }
                for d in e.descriptions {
                    if !x.descriptions.contains(&d) {
                        x.descriptions.push(d);
                    }
                }
                for (k, v) in e.attributes {
                    x.attributes.entry(k).or_insert(v);
                }
            }
            None => out.push(e),
        }
    }
    out
}

#[cfg(test)]
mod tests;
