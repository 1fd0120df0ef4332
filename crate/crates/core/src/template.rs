//! Event and relationship structures shared by Stages 3 to 5 and the scorer.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::tokenizer::{CalendarDate, Money, Span};

/// A textual fill: a name or a description taken from the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub text: String,
    pub is_name: bool,
    /// Document byte span the fill came from, absent for fixed fills.
    pub span: Option<Span>,
}

impl Fill {
    pub fn name(text: impl Into<String>, span: Option<Span>) -> Fill {
        Fill { text: text.into(), is_name: true, span }
    }

    pub fn description(text: impl Into<String>, span: Option<Span>) -> Fill {
        Fill { text: text.into(), is_name: false, span }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateFill {
    /// Temporal relation such as `DURING`.
    pub qualifier: Option<String>,
    /// Canonical calendar form, or the phrase text for relative dates ("last year").
    pub value: String,
    pub date: Option<CalendarDate>,
    pub span: Option<Span>,
}

impl fmt::Display for DateFill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{q}: {}", self.value),
            None => f.write_str(&self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotValue {
    Text(Fill),
    Symbol(String),
    Money(Money),
    Date(DateFill),
    /// Reference to another structure by id, e.g. `ACTIVITY-1`.
    Ref(String),
    List(Vec<SlotValue>),
}

impl SlotValue {
    /// Flattened elements; a non-list value is a one-element list.
    pub fn elements(&self) -> Vec<&SlotValue> {
        match self {
            SlotValue::List(items) => items.iter().flat_map(|v| v.elements()).collect(),
            other => vec![other],
        }
    }

    /// Plain display string without quoting.
    pub fn display(&self) -> String {
        match self {
            SlotValue::Text(f) => f.text.clone(),
            SlotValue::Symbol(s) => s.clone(),
            SlotValue::Money(m) => m.to_string(),
            SlotValue::Date(d) => d.to_string(),
            SlotValue::Ref(r) => r.clone(),
            SlotValue::List(items) => items.iter().map(|v| v.display()).collect::<Vec<_>>().join("; "),
        }
    }

    pub fn span(&self) -> Option<Span> {
        match self {
            SlotValue::Text(f) => f.span,
            SlotValue::Date(d) => d.span,
            SlotValue::List(items) => items.iter().find_map(|v| v.span()),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SlotValue::Ref(r) => Value::String(format!("ref:{r}")),
            SlotValue::List(items) => Value::Array(items.iter().map(|v| v.to_json()).collect()),
            other => Value::String(other.display()),
        }
    }

    /// Reads a fill back from the JSON form. Type distinctions other than
    /// references and lists are not recoverable and come back as text.
    pub fn from_json(v: &Value) -> Option<SlotValue> {
        match v {
            Value::String(s) => Some(match s.strip_prefix("ref:") {
                Some(r) => SlotValue::Ref(r.to_string()),
                None => SlotValue::Text(Fill::description(s.clone(), None)),
            }),
            Value::Array(items) => items.iter().map(SlotValue::from_json).collect::<Option<Vec<_>>>().map(SlotValue::List),
            Value::Number(n) => Some(SlotValue::Text(Fill::description(n.to_string(), None))),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub sentence: usize,
    pub span: Span,
    pub rule: String,
    pub subject_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateStructure {
    pub id: Option<String>,
    pub template_type: String,
    /// Filled slots only, in schema order.
    pub slots: IndexMap<String, SlotValue>,
    pub modality: Option<String>,
    pub provenance: Vec<Provenance>,
}

impl TemplateStructure {
    pub fn new(template_type: impl Into<String>) -> Self {
        TemplateStructure {
            id: None,
            template_type: template_type.into(),
            slots: IndexMap::new(),
            modality: None,
            provenance: Vec::new(),
        }
    }

    pub fn with_slot(mut self, name: &str, value: SlotValue) -> Self {
        self.slots.insert(name.to_string(), value);
        self
    }

    pub fn first_position(&self) -> Option<(usize, usize)> {
        self.provenance.iter().map(|p| (p.sentence, p.span.start)).min()
    }

    /// JSON form: `{"id", "type", "slots", "provenance"}`; empty slots omitted.
    pub fn to_json(&self) -> Value {
        let mut slots = serde_json::Map::new();
        for (k, v) in &self.slots {
            slots.insert(k.clone(), v.to_json());
        }
        let mut obj = serde_json::Map::new();
        if let Some(id) = &self.id {
            obj.insert("id".into(), json!(id));
        }
        obj.insert("type".into(), json!(self.template_type));
        obj.insert("slots".into(), Value::Object(slots));
        if let Some(m) = &self.modality {
            obj.insert("modality".into(), json!(m));
        }
        obj.insert(
            "provenance".into(),
            Value::Array(
                self.provenance
                    .iter()
                    .map(|p| {
                        json!({
                            "sentence": p.sentence,
                            "rule": p.rule,
                            "span": [p.span.start, p.span.end],
                            "subject_missing": p.subject_missing,
                        })
                    })
                    .collect(),
            ),
        );
        Value::Object(obj)
    }

    /// Slots and type only, for comparisons that ignore provenance.
    pub fn content_json(&self) -> Value {
        let mut v = self.to_json();
        if let Value::Object(o) = &mut v {
            o.remove("provenance");
            o.remove("id");
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<TemplateStructure, String> {
        let obj = v.as_object().ok_or("template must be a JSON object")?;
        let ty = obj.get("type").and_then(Value::as_str).ok_or("template needs a string `type`")?;
        let mut t = TemplateStructure::new(ty);
        t.id = obj.get("id").and_then(Value::as_str).map(str::to_string);
        t.modality = obj.get("modality").and_then(Value::as_str).map(str::to_string);
        if let Some(slots) = obj.get("slots") {
            let slots = slots.as_object().ok_or("`slots` must be an object")?;
            for (k, sv) in slots {
                let value = SlotValue::from_json(sv).ok_or_else(|| format!("bad value for slot `{k}`"))?;
                t.slots.insert(k.clone(), value);
            }
        }
        Ok(t)
    }

    /// Human-readable table; slots missing from `schema` order render as `--`.
    pub fn render_table(&self, schema: &TemplateSchema) -> String {
        let mut out = format!("{}:\n", self.id.as_deref().unwrap_or(&self.template_type));
        let names: Vec<String> = match schema.slots(&self.template_type) {
            Some(s) => s.to_vec(),
            None => self.slots.keys().cloned().collect(),
        };
        let width = names.iter().map(|n| n.len()).max().unwrap_or(0) + 1;
        for name in &names {
            let label = format!("{name}:");
            let values: Vec<String> = match self.slots.get(name) {
                None => vec!["--".to_string()],
                Some(v) => v.elements().into_iter().map(render_cell).collect(),
            };
            for (i, value) in values.iter().enumerate() {
                let lead = if i == 0 { label.as_str() } else { "" };
                out.push_str(&format!("  {lead:<width$} {value}\n"));
            }
        }
        out
    }
}

fn render_cell(v: &SlotValue) -> String {
    match v {
        SlotValue::Text(f) => format!("\"{}\"", f.text),
        other => other.display(),
    }
}

/// Slot names per template type, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSchema {
    pub types: IndexMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("unknown template type `{0}`")]
    UnknownType(String),
    #[error("template type `{ty}` has no slot `{slot}`")]
    UnknownSlot { ty: String, slot: String },
}

impl TemplateSchema {
    pub fn slots(&self, ty: &str) -> Option<&[String]> {
        self.types.get(ty).map(Vec::as_slice)
    }

    pub fn check(&self, t: &TemplateStructure) -> Result<(), SchemaError> {
        let slots = self.slots(&t.template_type).ok_or_else(|| SchemaError::UnknownType(t.template_type.clone()))?;
        for name in t.slots.keys() {
            if !slots.contains(name) {
                return Err(SchemaError::UnknownSlot { ty: t.template_type.clone(), slot: name.clone() });
            }
        }
        Ok(())
    }

    /// Reorders filled slots into schema order.
    pub fn order(&self, t: &mut TemplateStructure) {
        if let Some(order) = self.types.get(&t.template_type) {
            t.slots.sort_by_key(|k, _| order.iter().position(|s| s == k).unwrap_or(usize::MAX));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> TemplateSchema {
        let mut s = TemplateSchema::default();
        s.types.insert(
            "TIE-UP".into(),
            ["Relationship", "Entities", "Joint Venture Company", "Activity", "Amount"].map(String::from).to_vec(),
        );
        s
    }

    fn tie_up() -> TemplateStructure {
        let mut t = TemplateStructure::new("TIE-UP")
            .with_slot("Amount", SlotValue::Money(Money { amount: "20000000".into(), code: "NT$".into() }))
            .with_slot("Relationship", SlotValue::Symbol("TIE-UP".into()))
            .with_slot(
                "Entities",
                SlotValue::List(vec![
                    SlotValue::Text(Fill::name("Bridgestone Sports Co.", None)),
                    SlotValue::Text(Fill::description("a local concern", None)),
                ]),
            )
            .with_slot("Activity", SlotValue::Ref("ACTIVITY-1".into()));
        t.id = Some("TIE-UP-1".into());
        t
    }

    #[test]
    fn json_form() {
        let mut t = tie_up();
        schema().order(&mut t);
        let v = t.to_json();
        assert_eq!(v["slots"]["Amount"], "NT$20000000");
        assert_eq!(v["slots"]["Activity"], "ref:ACTIVITY-1");
        let keys: Vec<&String> = v["slots"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["Relationship", "Entities", "Activity", "Amount"]);
        let back = TemplateStructure::from_json(&v).unwrap();
        assert_eq!(back.slots["Activity"], SlotValue::Ref("ACTIVITY-1".into()));
        assert_eq!(back.slots["Entities"].elements().len(), 2);
    }

    #[test]
    fn table_marks_empty_slots() {
        let mut t = tie_up();
        schema().order(&mut t);
        let table = t.render_table(&schema());
        assert!(table.starts_with("TIE-UP-1:\n"));
        assert!(table.contains("Joint Venture Company: --"));
        assert!(table.contains("\"a local concern\""));
    }

    #[test]
    fn schema_rejects_unknown_slots() {
        let t = TemplateStructure::new("TIE-UP").with_slot("Color", SlotValue::Symbol("RED".into()));
        assert!(matches!(schema().check(&t), Err(SchemaError::UnknownSlot { .. })));
        assert!(matches!(schema().check(&TemplateStructure::new("X")), Err(SchemaError::UnknownType(_))));
    }

    #[test]
    fn date_fill_display() {
        let d = DateFill {
            qualifier: Some("DURING".into()),
            value: "January 1990".into(),
            date: Some(CalendarDate { year: Some(1990), month: Some(1), day: None }),
            span: None,
        };
        assert_eq!(SlotValue::Date(d).display(), "DURING: January 1990");
    }
}
