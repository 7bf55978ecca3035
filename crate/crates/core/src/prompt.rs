//! Zero-shot prompt assembly.
//!
//! One template with conditional sections covers every input
//! configuration. Sections are delimited by fixed `## ` headers so the
//! rendered text is stable across runs and can be checked against golden
//! files.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::EpisodeMetadata;
use crate::speech::{HINT_INTERVIEW, HINT_PANEL, HINT_SINGLE_HOST};
use crate::taxonomy::{Taxonomy, TaxonomySet};

pub const TEMPLATE_VERSION: &str = "v1";

mod assets {
    pub const SYSTEM: &str = include_str!("../assets/prompt/v1/system.txt");
    pub const TASKS: &str = include_str!("../assets/prompt/v1/tasks.txt");
    pub const CONSTRAINTS: &str = include_str!("../assets/prompt/v1/constraints.txt");
    pub const VISUAL_ONLY: &str = include_str!("../assets/prompt/v1/sources_visual_only.txt");
    pub const METADATA: &str = include_str!("../assets/prompt/v1/sources_metadata.txt");
    pub const ASR: &str = include_str!("../assets/prompt/v1/sources_asr.txt");
    pub const HIERARCHY: &str = include_str!("../assets/prompt/v1/sources_hierarchy.txt");
    pub const DIARIZATION: &str = include_str!("../assets/prompt/v1/sources_diarization.txt");
    pub const IDENTITY_METADATA: &str = include_str!("../assets/prompt/v1/identity_metadata.txt");
    pub const IDENTITY_TRANSCRIPT: &str = include_str!("../assets/prompt/v1/identity_transcript.txt");
    pub const OUTPUT: &str = include_str!("../assets/prompt/v1/output.txt");
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("input configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("invalid input configuration: {0}")]
    InvalidConfiguration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisualMode {
    Frames,
    Video,
}

impl fmt::Display for VisualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VisualMode::Frames => "frames",
            VisualMode::Video => "video",
        })
    }
}

impl FromStr for VisualMode {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frames" => Ok(VisualMode::Frames),
            "video" => Ok(VisualMode::Video),
            other => Err(PromptError::InvalidConfiguration(format!("unknown visual mode {other:?}"))),
        }
    }
}

/// Which textual signals accompany the visual payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputConfiguration {
    pub visual_mode: VisualMode,
    pub with_asr: bool,
    pub with_diarization: bool,
    pub with_metadata: bool,
}

/// Configuration names in report order.
pub const CONFIG_NAMES: [&str; 6] = ["only", "asr", "asr_diar", "meta", "asr_meta", "asr_diar_meta"];

impl InputConfiguration {
    pub fn new(
        visual_mode: VisualMode,
        with_asr: bool,
        with_diarization: bool,
        with_metadata: bool,
    ) -> Result<Self, PromptError> {
        let cfg = InputConfiguration { visual_mode, with_asr, with_diarization, with_metadata };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a configuration name such as `asr_diar_meta`.
    pub fn preset(visual_mode: VisualMode, name: &str) -> Result<Self, PromptError> {
        let (asr, diar, meta) = match name {
            "only" => (false, false, false),
            "asr" => (true, false, false),
            "asr_diar" => (true, true, false),
            "meta" => (false, false, true),
            "asr_meta" => (true, false, true),
            "asr_diar_meta" => (true, true, true),
            other => {
                return Err(PromptError::InvalidConfiguration(format!(
                    "unknown configuration {other:?}"
                )))
            }
        };
        InputConfiguration::new(visual_mode, asr, diar, meta)
    }

    /// Every configuration the visual mode exposes, in report order.
    pub fn all(visual_mode: VisualMode) -> Vec<InputConfiguration> {
        CONFIG_NAMES.iter().filter_map(|n| InputConfiguration::preset(visual_mode, n).ok()).collect()
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.with_diarization && !self.with_asr {
            return Err(PromptError::InvalidConfiguration("diarization requires ASR".into()));
        }
        if self.visual_mode == VisualMode::Video && self.with_asr && !self.with_metadata {
            return Err(PromptError::InvalidConfiguration(format!(
                "the video pipeline does not expose `{}`",
                self.name()
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match (self.with_asr, self.with_diarization, self.with_metadata) {
            (false, _, false) => "only",
            (true, false, false) => "asr",
            (true, true, false) => "asr_diar",
            (false, _, true) => "meta",
            (true, false, true) => "asr_meta",
            (true, true, true) => "asr_diar_meta",
        }
    }

    /// Position in [`CONFIG_NAMES`], used to sort report rows.
    pub fn rank(&self) -> usize {
        CONFIG_NAMES.iter().position(|n| *n == self.name()).unwrap_or(CONFIG_NAMES.len())
    }
}

impl fmt::Display for InputConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.visual_mode, self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VisualPayload {
    /// JPEG keyframes in chronological order.
    Frames(Vec<Vec<u8>>),
    Video(PathBuf),
}

impl VisualPayload {
    pub fn mode(&self) -> VisualMode {
        match self {
            VisualPayload::Frames(_) => VisualMode::Frames,
            VisualPayload::Video(_) => VisualMode::Video,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
    pub visual: VisualPayload,
    pub config: InputConfiguration,
}

fn push_labels(out: &mut String, header: &str, tax: &Taxonomy) {
    let _ = writeln!(out, "## {header}");
    for label in tax.labels() {
        let _ = writeln!(out, "- {label}");
    }
    out.push('\n');
}

fn push_metadata(out: &mut String, meta: &EpisodeMetadata) {
    out.push_str("## METADATA\n");
    let _ = writeln!(out, "Programme: {}", meta.programme_title.trim());
    let _ = writeln!(out, "Broadcast date: {}", meta.broadcast_date);
    let _ = writeln!(out, "Genre: {}", meta.genre.trim());
    if let Some(d) = meta.description.as_deref().filter(|d| !d.trim().is_empty()) {
        let _ = writeln!(out, "Description: {}", d.trim());
    }
    if let Some(guests) = meta.expected_guests.as_ref().filter(|g| !g.is_empty()) {
        let _ = writeln!(out, "Expected guests: {}", guests.join(", "));
    }
    out.push('\n');
}

fn heuristic_label(env: &Taxonomy, label: &str) -> String {
    env.canonical(label).map(|l| format!(" ({l})")).unwrap_or_default()
}

fn sources_section(config: &InputConfiguration, taxonomies: &TaxonomySet) -> String {
    let (noun, source) = match config.visual_mode {
        VisualMode::Frames => ("keyframes", "FRAMES"),
        VisualMode::Video => ("video", "VIDEO"),
    };
    let mut out = String::from("## SOURCES\n");
    match (config.with_asr, config.with_metadata) {
        (false, false) => out.push_str(&assets::VISUAL_ONLY.replace("{visual_noun}", noun)),
        (false, true) => out.push_str(assets::METADATA),
        (true, false) => out.push_str(&assets::ASR.replace("{visual_noun}", noun)),
        (true, true) => out.push_str(&assets::HIERARCHY.replace("{visual_source}", source)),
    }
    if config.with_diarization {
        let env = &taxonomies.environment;
        out.push_str(
            &assets::DIARIZATION
                .replace("{single_label}", &heuristic_label(env, HINT_SINGLE_HOST))
                .replace("{interview_label}", &heuristic_label(env, HINT_INTERVIEW))
                .replace("{panel_label}", &heuristic_label(env, HINT_PANEL)),
        );
        out.push_str(if config.with_metadata {
            assets::IDENTITY_METADATA
        } else {
            assets::IDENTITY_TRANSCRIPT
        });
    }
    out.push('\n');
    out
}

fn clip_section(visual: &VisualPayload) -> String {
    match visual {
        VisualPayload::Frames(frames) => format!(
            "## CLIP\nYou are given {} keyframes sampled from a one-minute clip, in chronological order.\n\n",
            frames.len()
        ),
        VisualPayload::Video(_) => {
            "## CLIP\nYou are given the full one-minute video clip with its audio track.\n\n".to_string()
        }
    }
}

/// Builds the prompt for one clip under `config`.
///
/// `transcript` must be present exactly when the configuration uses ASR
/// (already rendered with speaker prefixes when diarized), and `metadata`
/// exactly when it uses metadata.
pub fn build_prompt(
    config: InputConfiguration,
    taxonomies: &TaxonomySet,
    transcript: Option<&str>,
    metadata: Option<&EpisodeMetadata>,
    visual: VisualPayload,
) -> Result<PromptBundle, PromptError> {
    config.validate()?;
    let mismatch = |m: &str| Err(PromptError::ConfigMismatch(m.to_string()));
    match (config.with_asr, transcript.is_some()) {
        (false, true) => return mismatch("transcript supplied but the configuration has no ASR"),
        (true, false) => return mismatch("configuration uses ASR but no transcript was supplied"),
        _ => {}
    }
    match (config.with_metadata, metadata.is_some()) {
        (false, true) => return mismatch("metadata supplied but the configuration has none"),
        (true, false) => return mismatch("configuration uses metadata but none was supplied"),
        _ => {}
    }
    if visual.mode() != config.visual_mode {
        return mismatch("visual payload does not match the configuration's visual mode");
    }

    let mut user = clip_section(&visual);
    user.push_str(assets::TASKS);
    user.push('\n');
    push_labels(&mut user, "TOPIC LABELS", &taxonomies.topic);
    push_labels(&mut user, "ENVIRONMENT LABELS", &taxonomies.environment);
    push_labels(&mut user, "BRAND SAFETY LABELS", &taxonomies.sensitive);
    user.push_str(assets::CONSTRAINTS);
    user.push('\n');
    user.push_str(&sources_section(&config, taxonomies));
    if let Some(meta) = metadata {
        push_metadata(&mut user, meta);
    }
    if let Some(text) = transcript {
        user.push_str("## TRANSCRIPT\n");
        if text.trim().is_empty() {
            user.push_str("(no speech detected)\n");
        } else {
            user.push_str(text.trim_end());
            user.push('\n');
        }
        user.push('\n');
    }
    user.push_str(assets::OUTPUT);

    Ok(PromptBundle { system_text: assets::SYSTEM.to_string(), user_text: user, visual, config })
}

/// JSON schema of the reply expected from the model.
pub fn expected_output_schema() -> serde_json::Value {
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "ClipAnnotation",
        "type": "object",
        "required": ["topic", "environment", "named_entities", "brand_safety_flag"],
        "properties": {
            "topic": { "type": "string", "description": "exactly one topic label" },
            "environment": { "type": "string", "description": "exactly one environment label" },
            "named_entities": {
                "type": "array",
                "items": { "type": "string" },
                "minItems": 0,
                "description": "people visually present, as FirstName LastName; may be empty"
            },
            "brand_safety_flag": {
                "type": "array",
                "items": { "type": "string" },
                "minItems": 0,
                "maxItems": 1,
                "description": "zero or one sensitive content label"
            }
        },
        "additionalProperties": false
    })
}

/// Renders a bundle's text parts in the golden-file layout.
pub fn render_golden(bundle: &PromptBundle) -> String {
    format!("=== SYSTEM ===\n{}=== USER ===\n{}", bundle.system_text, bundle.user_text)
}
