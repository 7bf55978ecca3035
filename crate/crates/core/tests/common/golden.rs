use std::path::PathBuf;

use chrono::NaiveDate;
use tvlens_core::prompt::{build_prompt, render_golden, InputConfiguration, VisualMode, VisualPayload};
use tvlens_core::speech::{merge_diarization, render_transcript, SpeakerSegments, SpeakerTurn, Transcript, TranscriptSegment};
use tvlens_core::{EpisodeMetadata, TaxonomySet};

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/golden")
}

pub fn golden_path(mode: VisualMode, config: &str) -> PathBuf {
    golden_dir().join(format!("{mode}_{config}.txt"))
}

fn transcript() -> Transcript {
    let seg = |a: f64, b: f64, t: &str| TranscriptSegment { start_s: a, end_s: b, text: t.into() };
    Transcript {
        segments: vec![
            seg(0.0, 6.5, "Buonasera e benvenuti a Piazza Aperta."),
            seg(6.5, 14.0, "Stasera parliamo di legge di bilancio con i nostri ospiti."),
            seg(14.0, 22.0, "Grazie dell'invito, la manovra va letta nel suo insieme."),
            seg(22.0, 31.5, "Io non sono d'accordo, i numeri dicono altro."),
        ],
        language: "it".into(),
        engine_id: "faster-whisper-medium".into(),
    }
}

fn speakers() -> SpeakerSegments {
    let turn = |a: f64, b: f64, s: &str| SpeakerTurn { start_s: a, end_s: b, speaker_id: s.into() };
    SpeakerSegments { turns: vec![turn(0.0, 14.0, "SPEAKER_00"), turn(14.0, 22.0, "SPEAKER_01"), turn(22.0, 31.5, "SPEAKER_02")] }
}

pub fn metadata() -> EpisodeMetadata {
    EpisodeMetadata {
        programme_title: "Piazza Aperta".into(),
        broadcast_date: NaiveDate::from_ymd_opt(2025, 3, 14).unwrap(),
        genre: "Talk show".into(),
        description: Some("Approfondimento politico sulla legge di bilancio.".into()),
        expected_guests: Some(vec!["Maria Rossi".into(), "Luca D'Angelo".into()]),
    }
}

/// The prompt text for `config` built from the fixed fixture inputs.
pub fn golden_text(mode: VisualMode, config: &str) -> String {
    let cfg = InputConfiguration::preset(mode, config).unwrap();
    let attributed = merge_diarization(&transcript(), &speakers());
    let text = cfg.with_asr.then(|| render_transcript(&attributed, cfg.with_diarization));
    let meta = metadata();
    let visual = match mode {
        VisualMode::Frames => VisualPayload::Frames(vec![Vec::new(); 18]),
        VisualMode::Video => VisualPayload::Video(PathBuf::from("clip.mp4")),
    };
    let bundle = build_prompt(cfg, &TaxonomySet::builtin(), text.as_deref(), cfg.with_metadata.then_some(&meta), visual).unwrap();
    render_golden(&bundle)
}
