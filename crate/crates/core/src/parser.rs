//! Raw model text to per-task predictions.
//!
//! Each task is validated on its own, so one malformed field never
//! invalidates the other three.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::names::normalize_name;
use crate::taxonomy::{Taxonomy, TaxonomySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    NoJson,
    MissingField,
    OutOfTaxonomy,
    TypeMismatch,
    /// The request itself failed, so there is nothing to parse.
    NoResponse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskValue<T> {
    Valid(T),
    Invalid(InvalidReason),
}

impl<T> TaskValue<T> {
    pub fn valid(&self) -> Option<&T> {
        match self {
            TaskValue::Valid(v) => Some(v),
            TaskValue::Invalid(_) => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, TaskValue::Valid(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedAnnotation {
    pub topic: TaskValue<String>,
    pub environment: TaskValue<String>,
    pub persons: TaskValue<Vec<String>>,
    pub sensitive: TaskValue<Vec<String>>,
    pub raw_text: String,
}

impl PredictedAnnotation {
    /// Every task invalid for the same reason.
    pub fn all_invalid(reason: InvalidReason, raw_text: impl Into<String>) -> Self {
        PredictedAnnotation {
            topic: TaskValue::Invalid(reason),
            environment: TaskValue::Invalid(reason),
            persons: TaskValue::Invalid(reason),
            sensitive: TaskValue::Invalid(reason),
            raw_text: raw_text.into(),
        }
    }

    pub fn fully_valid(&self) -> bool {
        self.topic.is_valid() && self.environment.is_valid() && self.persons.is_valid() && self.sensitive.is_valid()
    }
}

/// Byte range of the balanced `{...}` starting at `start`, honoring strings.
fn balanced_object_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// First top-level JSON object embedded in `raw`, skipping prose and fences.
pub fn extract_json_object(raw: &str) -> Option<Map<String, Value>> {
    let bytes = raw.as_bytes();
    let mut from = 0;
    while let Some(offset) = raw[from..].find('{') {
        let start = from + offset;
        if let Some(end) = balanced_object_end(bytes, start) {
            if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(&raw[start..end]) {
                return Some(map);
            }
        }
        from = start + 1;
    }
    None
}

fn single_label(obj: &Map<String, Value>, key: &str, tax: &Taxonomy) -> TaskValue<String> {
    match obj.get(key) {
        None | Some(Value::Null) => TaskValue::Invalid(InvalidReason::MissingField),
        Some(Value::String(s)) => match tax.canonical(s) {
            Some(label) => TaskValue::Valid(label.to_string()),
            None => TaskValue::Invalid(InvalidReason::OutOfTaxonomy),
        },
        Some(_) => TaskValue::Invalid(InvalidReason::TypeMismatch),
    }
}

fn persons(obj: &Map<String, Value>) -> TaskValue<Vec<String>> {
    let items = match obj.get("named_entities") {
        None => return TaskValue::Invalid(InvalidReason::MissingField),
        Some(Value::Null) => return TaskValue::Valid(Vec::new()),
        Some(Value::Array(items)) => items,
        Some(_) => return TaskValue::Invalid(InvalidReason::TypeMismatch),
    };
    let mut out: Vec<String> = Vec::new();
    for item in items {
        let Value::String(raw) = item else {
            return TaskValue::Invalid(InvalidReason::TypeMismatch);
        };
        if let Ok(name) = normalize_name(raw) {
            if !out.iter().any(|n| n.to_lowercase() == name.to_lowercase()) {
                out.push(name);
            }
        }
    }
    TaskValue::Valid(out)
}

fn sensitive(obj: &Map<String, Value>, tax: &Taxonomy) -> TaskValue<Vec<String>> {
    let raw: Vec<&Value> = match obj.get("brand_safety_flag") {
        None => return TaskValue::Invalid(InvalidReason::MissingField),
        Some(Value::Null) => Vec::new(),
        Some(v @ Value::String(_)) => vec![v],
        Some(Value::Array(items)) => items.iter().collect(),
        Some(_) => return TaskValue::Invalid(InvalidReason::TypeMismatch),
    };
    let mut out = Vec::new();
    for v in raw {
        match v {
            Value::String(s) if s.trim().is_empty() => {}
            Value::String(s) => match tax.canonical(s) {
                Some(label) => out.push(label.to_string()),
                None => return TaskValue::Invalid(InvalidReason::OutOfTaxonomy),
            },
            _ => return TaskValue::Invalid(InvalidReason::TypeMismatch),
        }
    }
    if out.len() > 1 {
        return TaskValue::Invalid(InvalidReason::TypeMismatch);
    }
    TaskValue::Valid(out)
}

/// Parses a model reply. Never fails: problems become per-task `Invalid`.
pub fn parse_response(raw_text: &str, taxonomies: &TaxonomySet) -> PredictedAnnotation {
    let Some(obj) = extract_json_object(raw_text) else {
        return PredictedAnnotation::all_invalid(InvalidReason::NoJson, raw_text);
    };
    PredictedAnnotation {
        topic: single_label(&obj, "topic", &taxonomies.topic),
        environment: single_label(&obj, "environment", &taxonomies.environment),
        persons: persons(&obj),
        sensitive: sensitive(&obj, &taxonomies.sensitive),
        raw_text: raw_text.to_string(),
    }
}

/// One line of the parse audit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub clip_id: String,
    pub raw_text: String,
    pub outcome: PredictedAnnotation,
}

impl AuditEntry {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("audit entries serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLEAN: &str = r#"{"topic": "domestic politics", "environment": "Studio -- Guest panel", "named_entities": ["mario rossi", "ROSSI, Mario", "Anna Bianchi"], "brand_safety_flag": []}"#;

    #[test]
    fn happy_path_canonicalizes() {
        let p = parse_response(CLEAN, &TaxonomySet::builtin());
        assert_eq!(p.topic, TaskValue::Valid("Domestic politics".into()));
        assert_eq!(p.environment, TaskValue::Valid("Studio -- Guest panel".into()));
        assert_eq!(p.persons, TaskValue::Valid(vec!["Mario Rossi".into(), "Anna Bianchi".into()]));
        assert_eq!(p.sensitive, TaskValue::Valid(vec![]));
        assert!(p.fully_valid());
    }

    #[test]
    fn out_of_taxonomy_is_isolated() {
        let raw = CLEAN.replace("domestic politics", "Sports news");
        let p = parse_response(&raw, &TaxonomySet::builtin());
        assert_eq!(p.topic, TaskValue::Invalid(InvalidReason::OutOfTaxonomy));
        assert!(p.environment.is_valid() && p.persons.is_valid() && p.sensitive.is_valid());
    }

    #[test]
    fn fences_and_prose_are_tolerated() {
        let set = TaxonomySet::builtin();
        let fenced = format!("Here is the annotation:\n```json\n{CLEAN}\n```\nThanks!");
        let a = parse_response(CLEAN, &set);
        let b = parse_response(&fenced, &set);
        assert_eq!((a.topic, a.environment, a.persons, a.sensitive), (b.topic, b.environment, b.persons, b.sensitive));
    }

    #[test]
    fn braces_inside_strings_and_bad_leading_objects() {
        let raw = format!("{{not json}} then {}", CLEAN.replace("Anna Bianchi", "Anna {Bianchi}"));
        let p = parse_response(&raw, &TaxonomySet::builtin());
        assert!(p.topic.is_valid());
    }

    #[test]
    fn no_json_anywhere() {
        let p = parse_response("I cannot help with that.", &TaxonomySet::builtin());
        assert_eq!(p, PredictedAnnotation::all_invalid(InvalidReason::NoJson, "I cannot help with that."));
    }

    #[test]
    fn brand_safety_forms() {
        let set = TaxonomySet::builtin();
        let with = |v: &str| {
            let raw = format!(r#"{{"topic":"Music","environment":"Home -- Kitchen","named_entities":[],"brand_safety_flag":{v}}}"#);
            parse_response(&raw, &set).sensitive
        };
        assert_eq!(with(r#""violence""#), TaskValue::Valid(vec!["Violence".into()]));
        assert_eq!(with(r#"["Blood"]"#), TaskValue::Valid(vec!["Blood".into()]));
        assert_eq!(with("null"), TaskValue::Valid(vec![]));
        assert_eq!(with(r#""""#), TaskValue::Valid(vec![]));
        assert_eq!(with(r#"["Blood","Violence"]"#), TaskValue::Invalid(InvalidReason::TypeMismatch));
        assert_eq!(with("3"), TaskValue::Invalid(InvalidReason::TypeMismatch));
        assert_eq!(with(r#""Gore""#), TaskValue::Invalid(InvalidReason::OutOfTaxonomy));
    }

    #[test]
    fn missing_and_mistyped_fields() {
        let p = parse_response(r#"{"topic": 5, "named_entities": "Mario Rossi"}"#, &TaxonomySet::builtin());
        assert_eq!(p.topic, TaskValue::Invalid(InvalidReason::TypeMismatch));
        assert_eq!(p.environment, TaskValue::Invalid(InvalidReason::MissingField));
        assert_eq!(p.persons, TaskValue::Invalid(InvalidReason::TypeMismatch));
        assert_eq!(p.sensitive, TaskValue::Invalid(InvalidReason::MissingField));
    }

    #[test]
    fn serialized_shape() {
        let v = serde_json::to_value(TaskValue::<String>::Invalid(InvalidReason::NoJson)).unwrap();
        assert_eq!(v, serde_json::json!({"invalid": "no_json"}));
        let v = serde_json::to_value(TaskValue::Valid("Music".to_string())).unwrap();
        assert_eq!(v, serde_json::json!({"valid": "Music"}));
    }
}
