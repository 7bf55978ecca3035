//! Minute-level audience analytics: intra-episode z-scores per cohort,
//! topic sensitivity, cohort gaps, guest statistics and airtime shares.
//!
//! Advertising minutes are dropped everywhere. Nothing here infers
//! anything the inputs do not state; guest gender comes from a registry.

mod analytics;
mod io;
pub mod svg;
mod zscore;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use analytics::{
    cohort_gap_ranking, eligible, guest_stats, topic_minutes_distribution, topic_sensitivity, CohortGap, GenderStats,
    GuestStats, TopicSensitivity, TopicShare, DEFAULT_GAP_TOP_K, DEFAULT_MIN_SUPPORT,
};
pub use io::{
    canonicalize_topics, load_audience_csv, load_minute_annotations, load_registry, parse_audience_csv,
    parse_minute_annotations, parse_registry, to_csv, GuestRegistry,
};
pub use zscore::{zscore_normalize, ZMinute};

#[derive(Debug, thiserror::Error)]
pub enum AudienceError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("duplicate minute {minute_index} for episode {episode_id:?}{}", cohort.map(|c| format!(" cohort {c}")).unwrap_or_default())]
    DuplicateMinute { episode_id: String, minute_index: u32, cohort: Option<Cohort> },
    #[error("episode {episode_id:?} cohort {cohort} has {count} non-advertising minutes, need at least 2")]
    InsufficientMinutes { episode_id: String, cohort: Cohort, count: usize },
    #[error("no audience minute matches an annotated minute")]
    EmptyJoin,
    #[error("episode {episode_id:?} minute {minute_index}: topic {topic:?} is not in the topic taxonomy")]
    OutOfTaxonomy { episode_id: String, minute_index: u32, topic: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cohort {
    #[serde(rename = "young_15_34")]
    Young,
    #[serde(rename = "adults_35_54")]
    Adults,
    #[serde(rename = "seniors_55p")]
    Seniors,
}

impl Cohort {
    pub const ALL: [Cohort; 3] = [Cohort::Young, Cohort::Adults, Cohort::Seniors];

    pub fn as_str(self) -> &'static str {
        match self {
            Cohort::Young => "young_15_34",
            Cohort::Adults => "adults_35_54",
            Cohort::Seniors => "seniors_55p",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Cohort::Young => "Young (15-34)",
            Cohort::Adults => "Adults (35-54)",
            Cohort::Seniors => "Seniors (55+)",
        }
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Cohort {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Cohort::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| format!("unknown cohort {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudienceMinute {
    pub episode_id: String,
    pub minute_index: u32,
    pub cohort: Cohort,
    /// Provider-normalized average minute rating, used as-is.
    pub amr_norm: f64,
    pub is_advertising: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinuteAnnotation {
    pub episode_id: String,
    pub minute_index: u32,
    pub topic: String,
    #[serde(default)]
    pub guests: Vec<String>,
    #[serde(default)]
    pub is_advertising: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "male" | "m" => Ok(Gender::Male),
            "female" | "f" => Ok(Gender::Female),
            "unknown" | "" => Ok(Gender::Unknown),
            other => Err(format!("unknown gender {other:?}")),
        }
    }
}
