use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tvlens_core::gateway::{run_batch, HttpGateway, ResponseCache};
use tvlens_core::parser::{parse_response, AuditEntry, PredictedAnnotation};
use tvlens_core::prompt::{build_prompt, InputConfiguration, PromptBundle, VisualMode, VisualPayload};
use tvlens_core::speech::{
    merge_diarization, render_transcript, AttributedTranscript, SpeakerSegments, Transcript, TranscriptCache,
};
use tvlens_core::{ClipRecord, TaxonomySet};

use super::sample::PlanFile;
use super::transcribe::{asr_engine, diarization_engine, diarization_key};
use super::{clips, jsonl, write_text};
use crate::manifest::Cell;
use crate::{Ctx, Outcome};

/// One line of a predictions file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRow {
    pub manifest_sha256: String,
    pub clip_id: String,
    pub model_id: String,
    pub input_config: InputConfiguration,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<PredictedAnnotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_tokens: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_tokens: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn transcript_text(ctx: &Ctx, cache: &TranscriptCache, clip: &ClipRecord, config: &InputConfiguration) -> Result<String> {
    let asr = asr_engine(ctx)?;
    let t: Transcript = cache.load(&clip.clip_id, &asr.engine_id)?.with_context(|| {
        format!(
            "clip {}: no transcript at {}; run `tvlens transcribe` first",
            clip.clip_id,
            cache.path(&clip.clip_id, &asr.engine_id).display()
        )
    })?;
    if !config.with_diarization {
        return Ok(render_transcript(&AttributedTranscript::from(&t), false));
    }
    let diar = diarization_engine(ctx)?;
    let key = diarization_key(diar);
    let s: SpeakerSegments = cache.load(&clip.clip_id, &key)?.with_context(|| {
        format!(
            "clip {}: no diarization at {}; run `tvlens transcribe` first",
            clip.clip_id,
            cache.path(&clip.clip_id, &key).display()
        )
    })?;
    Ok(render_transcript(&merge_diarization(&t, &s), true))
}

fn visual(ctx: &Ctx, clip: &ClipRecord, mode: VisualMode) -> Result<VisualPayload> {
    match mode {
        VisualMode::Video => {
            if !clip.media_path.exists() {
                bail!("clip {}: media file not found: {}", clip.clip_id, clip.media_path.display());
            }
            Ok(VisualPayload::Video(clip.media_path.clone()))
        }
        VisualMode::Frames => {
            let plan_path = ctx.layout.plan_path(&clip.clip_id);
            let missing = || format!("clip {}: no sampled frames at {}; run `tvlens sample` first", clip.clip_id, plan_path.display());
            let text = std::fs::read_to_string(&plan_path).with_context(missing)?;
            let plan: PlanFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", plan_path.display()))?;
            let dir = ctx.layout.frames_dir(&clip.clip_id);
            let frames = plan
                .frames
                .iter()
                .map(|name| std::fs::read(dir.join(name)).with_context(missing))
                .collect::<Result<Vec<_>>>()?;
            Ok(VisualPayload::Frames(frames))
        }
    }
}

fn bundles(ctx: &Ctx, cell: &Cell, clips: &[ClipRecord], tax: &TaxonomySet) -> Result<Vec<(String, PromptBundle)>> {
    let cache = TranscriptCache::new(ctx.layout.transcripts_dir());
    let cfg = cell.config;
    clips
        .iter()
        .map(|clip| {
            let transcript = if cfg.with_asr { Some(transcript_text(ctx, &cache, clip, &cfg)?) } else { None };
            let meta = cfg.with_metadata.then_some(&clip.episode_meta);
            let bundle = build_prompt(cfg, tax, transcript.as_deref(), meta, visual(ctx, clip, cfg.visual_mode)?)?;
            Ok((clip.clip_id.clone(), bundle))
        })
        .collect()
}

fn annotate_cell(ctx: &Ctx, cell: &Cell, clips: &[ClipRecord], tax: &TaxonomySet, outcome: &mut Outcome) -> Result<()> {
    let items = bundles(ctx, cell, clips, tax)?;
    let gateway = HttpGateway::new(Some(ResponseCache::new(ctx.manifest.cache_dir.join("responses"))))
        .with_namespace(ctx.namespace);
    let entries = run_batch(&items, &cell.model, ctx.manifest.parallelism, &gateway);

    let mut rows = Vec::with_capacity(entries.len());
    let mut audit = Vec::new();
    for entry in entries {
        let mut row = PredictionRow {
            manifest_sha256: ctx.manifest.hash.clone(),
            clip_id: entry.clip_id.clone(),
            model_id: cell.model.model_id.clone(),
            input_config: cell.config,
            prediction: None,
            input_tokens: None,
            output_tokens: None,
            latency_ms: None,
            error: None,
        };
        match entry.result {
            Ok(resp) => {
                let parsed = parse_response(&resp.raw_text, tax);
                audit.push(AuditEntry { clip_id: entry.clip_id, raw_text: resp.raw_text, outcome: parsed.clone() });
                row.prediction = Some(parsed);
                row.input_tokens = Some(resp.input_tokens);
                row.output_tokens = Some(resp.output_tokens);
                row.latency_ms = Some(resp.latency_ms);
            }
            Err(e) => {
                outcome.fail(format!("{}: clip {}: {e}", cell.label(), entry.clip_id));
                row.error = Some(e.to_string());
            }
        }
        rows.push(row);
    }
    let layout = &ctx.layout;
    write_text(&layout.predictions_path(&cell.model.model_id, &cell.config), &jsonl(&rows)?)?;
    let audit_text: String = audit.iter().map(|a| a.to_json_line() + "\n").collect();
    write_text(&layout.audit_path(&cell.model.model_id, &cell.config), &audit_text)?;
    log::info!("{}: {} rows", cell.label(), rows.len());
    Ok(())
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    if ctx.manifest.cells.is_empty() {
        bail!("the manifest defines no sweep cells ([[models]] with configs)");
    }
    let clips = clips(ctx)?;
    let tax = ctx.manifest.taxonomies()?;
    let mut outcome = Outcome::default();
    for cell in &ctx.manifest.cells {
        if let Err(e) = annotate_cell(ctx, cell, &clips, &tax, &mut outcome) {
            outcome.fail(format!("{}: {e:#}", cell.label()));
        }
    }
    Ok(outcome)
}
