use anyhow::{Context, Result};
use tvlens_core::speech::{diarize, transcribe, EngineConfig, SpeakerSegments, Transcript, TranscriptCache};
use tvlens_core::ClipRecord;

use super::clips;
use crate::{Ctx, Outcome};

/// Cache key for diarization output, kept apart from the ASR entry even
/// when both engines share an id.
pub fn diarization_key(engine: &EngineConfig) -> String {
    format!("{}.diarization", engine.engine_id)
}

pub fn asr_engine(ctx: &Ctx) -> Result<&EngineConfig> {
    ctx.manifest.asr.as_ref().context("the manifest has no [asr] engine but a sweep cell uses ASR")
}

pub fn diarization_engine(ctx: &Ctx) -> Result<&EngineConfig> {
    ctx.manifest
        .diarization
        .as_ref()
        .context("the manifest has no [diarization] engine but a sweep cell uses diarization")
}

fn transcribe_clip(ctx: &Ctx, cache: &TranscriptCache, clip: &ClipRecord) -> Result<usize> {
    let mut produced = 0;
    if let Some(asr) = &ctx.manifest.asr {
        if cache.load::<Transcript>(&clip.clip_id, &asr.engine_id)?.is_none() {
            let t = transcribe(&clip.media_path, asr).with_context(|| format!("clip {}", clip.clip_id))?;
            cache.store(&clip.clip_id, &asr.engine_id, &t)?;
            produced += 1;
        }
    }
    if let Some(diar) = &ctx.manifest.diarization {
        let key = diarization_key(diar);
        if cache.load::<SpeakerSegments>(&clip.clip_id, &key)?.is_none() {
            let s = diarize(&clip.media_path, diar).with_context(|| format!("clip {}", clip.clip_id))?;
            cache.store(&clip.clip_id, &key, &s)?;
            produced += 1;
        }
    }
    Ok(produced)
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    if ctx.manifest.uses_asr() {
        asr_engine(ctx)?;
    }
    if ctx.manifest.uses_diarization() {
        diarization_engine(ctx)?;
    }
    if ctx.manifest.asr.is_none() && ctx.manifest.diarization.is_none() {
        log::warn!("no speech engines configured; nothing to transcribe");
        return Ok(Outcome::default());
    }
    let clips = clips(ctx)?;
    let cache = TranscriptCache::new(ctx.layout.transcripts_dir());
    let results = ctx.exec().map(&clips, |clip| transcribe_clip(ctx, &cache, clip));
    let mut outcome = Outcome::default();
    let mut produced = 0;
    for r in results {
        match r {
            Ok(n) => produced += n,
            Err(e) => outcome.fail(format!("{e:#}")),
        }
    }
    log::info!("transcribe: {produced} new outputs, {} clips failed", outcome.failures.len());
    Ok(outcome)
}
