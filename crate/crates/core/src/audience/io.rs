use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AudienceError, AudienceMinute, Cohort, Gender, MinuteAnnotation};
use crate::eval::person_key;
use crate::names::normalize_name;
use crate::taxonomy::Taxonomy;

fn read(path: &Path) -> Result<String, AudienceError> {
    std::fs::read_to_string(path).map_err(|source| AudienceError::Io { path: path.display().to_string(), source })
}

fn parse_flag(raw: &str) -> Option<bool> {
    match raw.trim().to_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

#[derive(Deserialize)]
struct RawMinute {
    episode_id: String,
    minute_index: String,
    cohort: String,
    amr_norm: String,
    is_advertising: String,
}

/// Parses `episode_id,minute_index,cohort,amr_norm,is_advertising`.
///
/// Rows are numbered from 1 for the header, so the first data row is row 2.
pub fn parse_audience_csv(text: &str) -> Result<Vec<AudienceMinute>, AudienceError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<RawMinute>().enumerate() {
        let row = i + 2;
        let bad = |message: String| AudienceError::Parse { row, message };
        let raw = rec.map_err(|e| bad(e.to_string()))?;
        let minute_index = raw
            .minute_index
            .parse::<u32>()
            .map_err(|_| bad(format!("minute_index {:?} is not a non-negative integer", raw.minute_index)))?;
        let cohort: Cohort = raw.cohort.parse().map_err(bad)?;
        let amr_norm = raw
            .amr_norm
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("amr_norm {:?} is not a finite number", raw.amr_norm)))?;
        let is_advertising =
            parse_flag(&raw.is_advertising).ok_or_else(|| bad(format!("is_advertising {:?}", raw.is_advertising)))?;
        if !seen.insert((raw.episode_id.clone(), minute_index, cohort)) {
            return Err(AudienceError::DuplicateMinute {
                episode_id: raw.episode_id,
                minute_index,
                cohort: Some(cohort),
            });
        }
        out.push(AudienceMinute { episode_id: raw.episode_id, minute_index, cohort, amr_norm, is_advertising });
    }
    Ok(out)
}

pub fn load_audience_csv(path: impl AsRef<Path>) -> Result<Vec<AudienceMinute>, AudienceError> {
    parse_audience_csv(&read(path.as_ref())?)
}

/// One JSON object per line; blank lines are skipped.
pub fn parse_minute_annotations(text: &str) -> Result<Vec<MinuteAnnotation>, AudienceError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut ann: MinuteAnnotation =
            serde_json::from_str(line).map_err(|e| AudienceError::Parse { row: i + 1, message: e.to_string() })?;
        if !seen.insert((ann.episode_id.clone(), ann.minute_index)) {
            return Err(AudienceError::DuplicateMinute {
                episode_id: ann.episode_id,
                minute_index: ann.minute_index,
                cohort: None,
            });
        }
        ann.guests = ann.guests.iter().filter_map(|g| normalize_name(g).ok()).collect();
        out.push(ann);
    }
    Ok(out)
}

pub fn load_minute_annotations(path: impl AsRef<Path>) -> Result<Vec<MinuteAnnotation>, AudienceError> {
    parse_minute_annotations(&read(path.as_ref())?)
}

/// Rewrites each topic to its taxonomy spelling.
pub fn canonicalize_topics(annotations: &mut [MinuteAnnotation], topics: &Taxonomy) -> Result<(), AudienceError> {
    for ann in annotations.iter_mut() {
        match topics.canonical(&ann.topic) {
            Some(label) => ann.topic = label.to_string(),
            None => {
                return Err(AudienceError::OutOfTaxonomy {
                    episode_id: ann.episode_id.clone(),
                    minute_index: ann.minute_index,
                    topic: ann.topic.clone(),
                })
            }
        }
    }
    Ok(())
}

/// Declared gender per guest, keyed by canonical name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GuestRegistry {
    entries: BTreeMap<String, (String, Gender)>,
}

impl GuestRegistry {
    pub fn insert(&mut self, name: &str, gender: Gender) {
        if let (Some(key), Ok(canonical)) = (person_key(name), normalize_name(name)) {
            self.entries.insert(key, (canonical, gender));
        }
    }

    pub fn gender(&self, name: &str) -> Option<Gender> {
        self.entries.get(&person_key(name)?).map(|(_, g)| *g)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Deserialize)]
struct RawGuest {
    name: String,
    gender: String,
}

/// `name,gender` CSV.
pub fn parse_registry(text: &str) -> Result<GuestRegistry, AudienceError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut reg = GuestRegistry::default();
    for (i, rec) in reader.deserialize::<RawGuest>().enumerate() {
        let bad = |message: String| AudienceError::Parse { row: i + 2, message };
        let raw = rec.map_err(|e| bad(e.to_string()))?;
        let gender = raw.gender.parse().map_err(bad)?;
        if normalize_name(&raw.name).is_err() {
            return Err(bad("empty guest name".into()));
        }
        reg.insert(&raw.name, gender);
    }
    Ok(reg)
}

pub fn load_registry(path: impl AsRef<Path>) -> Result<GuestRegistry, AudienceError> {
    parse_registry(&read(path.as_ref())?)
}

/// Serializes flat records as CSV with a header row.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "episode_id,minute_index,cohort,amr_norm,is_advertising\n";

    #[test]
    fn parses_rows() {
        let text = format!("{HEADER}ep1,0,young_15_34,0.5,0\nep1,1,seniors_55p,1.25,true\n");
        let rows = parse_audience_csv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].cohort, Cohort::Seniors);
        assert!(rows[1].is_advertising);
    }

    #[test]
    fn unknown_cohort_names_the_row() {
        let text = format!("{HEADER}ep1,0,young_15_34,0.5,0\nep1,1,teens,0.5,0\n");
        let err = parse_audience_csv(&text).unwrap_err();
        assert!(matches!(&err, AudienceError::Parse { row: 3, message } if message.contains("teens")), "{err}");
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = format!("{HEADER}ep1,0,young_15_34,0.5,0\nep1,0,young_15_34,0.7,0\n");
        assert!(matches!(parse_audience_csv(&text), Err(AudienceError::DuplicateMinute { .. })));
    }

    #[test]
    fn annotations_normalize_guests() {
        let text = r#"{"episode_id":"e","minute_index":3,"topic":"Music","guests":["rossi, mario"]}"#;
        let anns = parse_minute_annotations(text).unwrap();
        assert_eq!(anns[0].guests, ["Mario Rossi"]);
    }

    #[test]
    fn registry_lookup_is_case_insensitive() {
        let reg = parse_registry("name,gender\nMario Rossi,male\n\"Bianchi, Anna\",F\n").unwrap();
        assert_eq!(reg.gender("mario rossi"), Some(Gender::Male));
        assert_eq!(reg.gender("Anna Bianchi"), Some(Gender::Female));
        assert_eq!(reg.gender("Nobody"), None);
    }
}
