//! Clip records and the JSON Lines dataset format.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::taxonomy::Annotation;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate clip_id {clip_id:?}")]
    DuplicateClip { line: usize, clip_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeMetadata {
    pub programme_title: String,
    pub broadcast_date: NaiveDate,
    pub genre: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_guests: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub media_path: PathBuf,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    pub episode_meta: EpisodeMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<Annotation>,
}

fn default_duration() -> f64 {
    60.0
}

impl ClipRecord {
    fn check(&self) -> Result<(), String> {
        if self.clip_id.trim().is_empty() {
            return Err("clip_id is empty".into());
        }
        if self.duration_s <= 0.0 || !self.duration_s.is_finite() {
            return Err(format!("clip {}: duration_s must be positive", self.clip_id));
        }
        if self.episode_meta.programme_title.trim().is_empty() {
            return Err(format!("clip {}: programme_title is empty", self.clip_id));
        }
        Ok(())
    }
}

/// Parses a JSON Lines dataset. Relative media paths are resolved against `base`.
pub fn parse_dataset(text: &str, base: Option<&Path>) -> Result<Vec<ClipRecord>, DatasetError> {
    let mut clips = Vec::new();
    let mut ids = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut clip: ClipRecord = serde_json::from_str(line)
            .map_err(|e| DatasetError::Parse { line: line_no, message: e.to_string() })?;
        clip.check().map_err(|message| DatasetError::Parse { line: line_no, message })?;
        if !ids.insert(clip.clip_id.clone()) {
            return Err(DatasetError::DuplicateClip { line: line_no, clip_id: clip.clip_id });
        }
        if let Some(base) = base {
            if clip.media_path.is_relative() {
                clip.media_path = base.join(&clip.media_path);
            }
        }
        clips.push(clip);
    }
    Ok(clips)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<ClipRecord>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    parse_dataset(&text, path.parent())
}
