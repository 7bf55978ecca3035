//! External ASR and diarization engines.
//!
//! Subprocess engines receive `{"audio_path": ..., "language": ...}` on
//! stdin and print JSON on stdout. HTTP engines receive a multipart POST
//! with an `audio` file part and a `language` field and reply with the same
//! JSON. Transcription replies carry `segments: [{start, end, text}]`, and
//! diarization replies carry `turns: [{start, end, speaker}]`.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    densify_speakers, SpeakerSegments, SpeakerTurn, SpeechError, Transcript, TranscriptSegment,
};

pub const DEFAULT_ASR_ENGINE: &str = "faster-whisper-medium";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transport", rename_all = "snake_case")]
pub enum EngineTransport {
    Subprocess { command: Vec<String> },
    Http { url: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default = "default_engine_id")]
    pub engine_id: String,
    #[serde(flatten)]
    pub transport: EngineTransport,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
}

fn default_engine_id() -> String {
    DEFAULT_ASR_ENGINE.to_string()
}

fn default_language() -> String {
    "it".to_string()
}

fn default_timeout() -> f64 {
    600.0
}

#[derive(Deserialize)]
struct WireSegment {
    #[serde(alias = "start_s")]
    start: f64,
    #[serde(alias = "end_s")]
    end: f64,
    text: String,
}

#[derive(Deserialize)]
struct WireTranscript {
    #[serde(default)]
    language: Option<String>,
    segments: Vec<WireSegment>,
}

#[derive(Deserialize)]
struct WireTurn {
    #[serde(alias = "start_s")]
    start: f64,
    #[serde(alias = "end_s")]
    end: f64,
    #[serde(alias = "speaker_id", alias = "label")]
    speaker: String,
}

#[derive(Deserialize)]
struct WireDiarization {
    #[serde(alias = "segments")]
    turns: Vec<WireTurn>,
}

impl EngineConfig {
    fn unavailable(&self, reason: impl Into<String>) -> SpeechError {
        SpeechError::EngineUnavailable { engine_id: self.engine_id.clone(), reason: reason.into() }
    }

    fn protocol(&self, reason: impl Into<String>) -> SpeechError {
        SpeechError::EngineProtocolError { engine_id: self.engine_id.clone(), reason: reason.into() }
    }

    fn call(&self, audio: &Path) -> Result<Vec<u8>, SpeechError> {
        if !audio.exists() {
            return Err(SpeechError::AudioNotFound(audio.display().to_string()));
        }
        match &self.transport {
            EngineTransport::Subprocess { command } => self.call_subprocess(command, audio),
            EngineTransport::Http { url } => self.call_http(url, audio),
        }
    }

    fn call_subprocess(&self, command: &[String], audio: &Path) -> Result<Vec<u8>, SpeechError> {
        let (program, args) = command.split_first().ok_or_else(|| self.unavailable("empty command"))?;
        let request = serde_json::json!({
            "audio_path": audio.display().to_string(),
            "language": self.language,
        });
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| self.unavailable(format!("{program}: {e}")))?;
        if let Some(mut stdin) = child.stdin.take() {
            // engines that ignore stdin may close it early
            let _ = stdin.write_all(request.to_string().as_bytes());
        }
        let output = child.wait_with_output().map_err(|e| self.unavailable(e.to_string()))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(self.unavailable(format!("exited with {}: {}", output.status, stderr.trim())));
        }
        Ok(output.stdout)
    }

    fn call_http(&self, url: &str, audio: &Path) -> Result<Vec<u8>, SpeechError> {
        let bytes = std::fs::read(audio).map_err(|e| SpeechError::AudioNotFound(e.to_string()))?;
        let boundary = "tvlens-audio-boundary-7c1f";
        let filename = audio.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let mut body = Vec::with_capacity(bytes.len() + 512);
        body.extend_from_slice(
            format!(
                "--{boundary}\r\nContent-Disposition: form-data; name=\"language\"\r\n\r\n{}\r\n",
                self.language
            )
            .as_bytes(),
        );
        body.extend_from_slice(
            format!(
                "--{boundary}\r\nContent-Disposition: form-data; name=\"audio\"; filename=\"{filename}\"\r\nContent-Type: application/octet-stream\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(&bytes);
        body.extend_from_slice(format!("\r\n--{boundary}--\r\n").as_bytes());

        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(self.timeout_s)).build();
        let resp = agent
            .post(url)
            .set("Content-Type", &format!("multipart/form-data; boundary={boundary}"))
            .send_bytes(&body)
            .map_err(|e| self.unavailable(e.to_string()))?;
        let mut out = Vec::new();
        std::io::Read::read_to_end(&mut resp.into_reader(), &mut out)
            .map_err(|e| self.unavailable(e.to_string()))?;
        Ok(out)
    }
}

/// Runs the ASR engine on `audio`.
pub fn transcribe(audio: &Path, engine: &EngineConfig) -> Result<Transcript, SpeechError> {
    let raw = engine.call(audio)?;
    parse_transcript(&raw, engine)
}

fn parse_transcript(raw: &[u8], engine: &EngineConfig) -> Result<Transcript, SpeechError> {
    let wire: WireTranscript =
        serde_json::from_slice(raw).map_err(|e| engine.protocol(e.to_string()))?;
    let mut segments = Vec::with_capacity(wire.segments.len());
    for (i, s) in wire.segments.into_iter().enumerate() {
        if !(s.start.is_finite() && s.end.is_finite()) || s.start > s.end {
            return Err(engine.protocol(format!("segment {i} has invalid times {}..{}", s.start, s.end)));
        }
        if s.text.trim().is_empty() {
            continue;
        }
        segments.push(TranscriptSegment { start_s: s.start, end_s: s.end, text: s.text.trim().to_string() });
    }
    Ok(Transcript {
        segments,
        language: wire.language.unwrap_or_else(|| engine.language.clone()),
        engine_id: engine.engine_id.clone(),
    })
}

/// Runs the diarization engine on `audio`; speaker ids come back dense.
pub fn diarize(audio: &Path, engine: &EngineConfig) -> Result<SpeakerSegments, SpeechError> {
    let raw = engine.call(audio)?;
    parse_diarization(&raw, engine)
}

fn parse_diarization(raw: &[u8], engine: &EngineConfig) -> Result<SpeakerSegments, SpeechError> {
    let wire: WireDiarization =
        serde_json::from_slice(raw).map_err(|e| engine.protocol(e.to_string()))?;
    let mut turns = Vec::with_capacity(wire.turns.len());
    for (i, t) in wire.turns.into_iter().enumerate() {
        if !(t.start.is_finite() && t.end.is_finite()) || t.start > t.end {
            return Err(engine.protocol(format!("turn {i} has invalid times {}..{}", t.start, t.end)));
        }
        if t.start == t.end {
            continue;
        }
        if t.speaker.trim().is_empty() {
            return Err(engine.protocol(format!("turn {i} has no speaker")));
        }
        turns.push(SpeakerTurn { start_s: t.start, end_s: t.end, speaker_id: t.speaker });
    }
    Ok(densify_speakers(SpeakerSegments { turns }))
}
