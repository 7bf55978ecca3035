//! Transcripts, diarization turns and their fusion into prompt text.

mod cache;
mod engine;
mod merge;

use serde::{Deserialize, Serialize};

pub use cache::TranscriptCache;
pub use engine::{diarize, transcribe, EngineConfig, EngineTransport, DEFAULT_ASR_ENGINE};
pub use merge::{
    densify_speakers, merge_diarization, render_transcript, speaker_count_hint, SpeakerHint,
    HINT_INTERVIEW, HINT_PANEL, HINT_SINGLE_HOST,
};

#[derive(Debug, thiserror::Error)]
pub enum SpeechError {
    #[error("engine {engine_id} unavailable: {reason}")]
    EngineUnavailable { engine_id: String, reason: String },
    #[error("engine {engine_id} returned a malformed payload: {reason}")]
    EngineProtocolError { engine_id: String, reason: String },
    #[error("audio not found: {0}")]
    AudioNotFound(String),
    #[error("transcript cache: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub segments: Vec<TranscriptSegment>,
    /// BCP-47 language tag.
    pub language: String,
    pub engine_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerTurn {
    pub start_s: f64,
    pub end_s: f64,
    /// `SPEAKER_NN`, dense from `SPEAKER_00`.
    pub speaker_id: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpeakerSegments {
    pub turns: Vec<SpeakerTurn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributedSegment {
    pub start_s: f64,
    pub end_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker_id: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AttributedTranscript {
    pub segments: Vec<AttributedSegment>,
}

impl From<&Transcript> for AttributedTranscript {
    /// A transcript without diarization: no speakers anywhere.
    fn from(t: &Transcript) -> Self {
        AttributedTranscript {
            segments: t
                .segments
                .iter()
                .map(|s| AttributedSegment {
                    start_s: s.start_s,
                    end_s: s.end_s,
                    speaker_id: None,
                    text: s.text.clone(),
                })
                .collect(),
        }
    }
}

pub fn speaker_label(index: usize) -> String {
    format!("SPEAKER_{index:02}")
}
