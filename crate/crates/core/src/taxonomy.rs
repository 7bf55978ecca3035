//! Label taxonomies and annotation validation.
//!
//! Taxonomy files are plain UTF-8 text with one label per line. A line may
//! carry a macro group after a tab (`label<TAB>group`); lines starting with
//! `#` and blank lines are skipped.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("duplicate label {label:?} on line {line}")]
    DuplicateLabel { label: String, line: usize },
    #[error("taxonomy has no labels")]
    EmptyTaxonomy,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("macro group key {0:?} is not a label")]
    UnknownMacroKey(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Topic,
    Environment,
    Sensitive,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Topic => "topic",
            Dimension::Environment => "environment",
            Dimension::Sensitive => "sensitive",
        })
    }
}

/// Storage form of a label: NFC with surrounding whitespace removed.
pub fn clean_label(raw: &str) -> String {
    raw.trim().nfc().collect()
}

/// Comparison key for label membership tests.
pub fn label_key(raw: &str) -> String {
    clean_label(raw).to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    dimension: Dimension,
    labels: Vec<String>,
    macro_groups: BTreeMap<String, String>,
    index: HashMap<String, usize>,
}

impl Taxonomy {
    pub fn new(
        dimension: Dimension,
        labels: Vec<String>,
        macro_groups: BTreeMap<String, String>,
    ) -> Result<Self, TaxonomyError> {
        let labels: Vec<String> = labels.iter().map(|l| clean_label(l)).collect();
        if labels.is_empty() {
            return Err(TaxonomyError::EmptyTaxonomy);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(TaxonomyError::Parse { line: i + 1, message: "empty label".into() });
            }
            if index.insert(label_key(label), i).is_some() {
                return Err(TaxonomyError::DuplicateLabel { label: label.clone(), line: i + 1 });
            }
        }
        let macro_groups: BTreeMap<String, String> = macro_groups
            .into_iter()
            .map(|(k, v)| (clean_label(&k), v.trim().to_string()))
            .collect();
        for key in macro_groups.keys() {
            // keys must be stored exactly as the label is stored
            match index.get(&label_key(key)) {
                Some(&i) if labels[i] == *key => {}
                _ => return Err(TaxonomyError::UnknownMacroKey(key.clone())),
            }
        }
        Ok(Taxonomy { dimension, labels, macro_groups, index })
    }

    /// Parses the taxonomy file format.
    pub fn parse(dimension: Dimension, text: &str) -> Result<Self, TaxonomyError> {
        let mut labels = Vec::new();
        let mut groups = BTreeMap::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let label = clean_label(fields.next().unwrap_or_default());
            let group = fields.next().map(str::trim);
            if fields.next().is_some() {
                return Err(TaxonomyError::Parse {
                    line: line_no,
                    message: "expected `label` or `label<TAB>macro_group`".into(),
                });
            }
            if label.is_empty() {
                return Err(TaxonomyError::Parse { line: line_no, message: "empty label".into() });
            }
            if seen.insert(label_key(&label), line_no).is_some() {
                return Err(TaxonomyError::DuplicateLabel { label, line: line_no });
            }
            match group {
                Some("") => {
                    return Err(TaxonomyError::Parse {
                        line: line_no,
                        message: "empty macro group after tab".into(),
                    })
                }
                Some(g) => {
                    groups.insert(label.clone(), g.to_string());
                }
                None => {}
            }
            labels.push(label);
        }
        Taxonomy::new(dimension, labels, groups)
    }

    pub fn load(dimension: Dimension, path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| TaxonomyError::Io { path: path.display().to_string(), source })?;
        Taxonomy::parse(dimension, &text)
    }

    /// Renders the taxonomy back into the file format.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for label in &self.labels {
            out.push_str(label);
            if let Some(g) = self.macro_groups.get(label) {
                out.push('\t');
                out.push_str(g);
            }
            out.push('\n');
        }
        out
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn macro_group(&self, label: &str) -> Option<&str> {
        self.canonical(label).and_then(|l| self.macro_groups.get(l)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Case-insensitive lookup returning the stored casing.
    pub fn canonical(&self, raw: &str) -> Option<&str> {
        self.index.get(&label_key(raw)).map(|&i| self.labels[i].as_str())
    }

    pub fn contains(&self, raw: &str) -> bool {
        self.canonical(raw).is_some()
    }
}

/// The three label taxonomies used together by prompts, parsing and validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomySet {
    pub topic: Taxonomy,
    pub environment: Taxonomy,
    pub sensitive: Taxonomy,
}

const BUILTIN_TOPIC: &str = include_str!("../assets/taxonomy/topic.txt");
const BUILTIN_ENVIRONMENT: &str = include_str!("../assets/taxonomy/environment.txt");
const BUILTIN_SENSITIVE: &str = include_str!("../assets/taxonomy/sensitive.txt");

impl TaxonomySet {
    /// The default taxonomies shipped with the crate (21 topic, 15
    /// environment and 6 sensitive labels).
    pub fn builtin() -> Self {
        TaxonomySet {
            topic: Taxonomy::parse(Dimension::Topic, BUILTIN_TOPIC).expect("builtin topic taxonomy"),
            environment: Taxonomy::parse(Dimension::Environment, BUILTIN_ENVIRONMENT)
                .expect("builtin environment taxonomy"),
            sensitive: Taxonomy::parse(Dimension::Sensitive, BUILTIN_SENSITIVE)
                .expect("builtin sensitive taxonomy"),
        }
    }

    pub fn load(
        topic: impl AsRef<Path>,
        environment: impl AsRef<Path>,
        sensitive: impl AsRef<Path>,
    ) -> Result<Self, TaxonomyError> {
        Ok(TaxonomySet {
            topic: Taxonomy::load(Dimension::Topic, topic)?,
            environment: Taxonomy::load(Dimension::Environment, environment)?,
            sensitive: Taxonomy::load(Dimension::Sensitive, sensitive)?,
        })
    }

    pub fn get(&self, dimension: Dimension) -> &Taxonomy {
        match dimension {
            Dimension::Topic => &self.topic,
            Dimension::Environment => &self.environment,
            Dimension::Sensitive => &self.sensitive,
        }
    }
}

/// Four-task label bundle for one clip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub topic: String,
    pub environment: String,
    #[serde(default)]
    pub persons: Vec<String>,
    #[serde(default)]
    pub sensitive: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutOfTaxonomy { dimension: Dimension, label: String },
    DuplicatePerson { name: String },
    InvalidPerson { name: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_annotation(ann: &Annotation, taxonomies: &TaxonomySet) -> ValidationReport {
    let mut violations = Vec::new();
    let mut check = |dimension: Dimension, label: &str| {
        if !taxonomies.get(dimension).contains(label) {
            violations.push(Violation::OutOfTaxonomy { dimension, label: label.to_string() });
        }
    };
    check(Dimension::Topic, &ann.topic);
    check(Dimension::Environment, &ann.environment);
    for s in &ann.sensitive {
        check(Dimension::Sensitive, s);
    }

    let mut seen = std::collections::HashSet::new();
    for name in &ann.persons {
        match crate::names::normalize_name(name) {
            Ok(n) => {
                if !seen.insert(n.to_lowercase()) {
                    violations.push(Violation::DuplicatePerson { name: name.clone() });
                }
            }
            Err(_) => violations.push(Violation::InvalidPerson { name: name.clone() }),
        }
    }
    ValidationReport { violations }
}
