use anyhow::Result;
use serde::{Deserialize, Serialize};
use tvlens_core::frames::{extract_frames, plan, plan_shots_from_media, FramePlan, FramingStrategy};
use tvlens_core::ClipRecord;

use super::{clips, write_json};
use crate::{Ctx, Outcome};

#[derive(Debug, Serialize, Deserialize)]
pub struct PlanFile {
    pub manifest_sha256: String,
    pub clip_id: String,
    pub media_path: String,
    pub plan: FramePlan,
    pub frames: Vec<String>,
}

enum Sampled {
    Extracted,
    Reused,
}

fn plan_for(ctx: &Ctx, clip: &ClipRecord) -> Result<FramePlan> {
    Ok(match &ctx.manifest.framing {
        FramingStrategy::ShotBased { budget, detector } => {
            plan_shots_from_media(&ctx.manifest.decoder, &clip.media_path, clip.duration_s, *budget, detector)?
        }
        other => plan(other, clip.duration_s)?,
    })
}

fn sample_clip(ctx: &Ctx, clip: &ClipRecord) -> Result<Sampled> {
    if !clip.media_path.exists() {
        anyhow::bail!("clip {}: media file not found: {}", clip.clip_id, clip.media_path.display());
    }
    let layout = &ctx.layout;
    let fp = plan_for(ctx, clip)?;
    let names: Vec<String> = (0..fp.len())
        .map(|i| layout.frame_path(&clip.clip_id, i).file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let plan_path = layout.plan_path(&clip.clip_id);
    let record = PlanFile {
        manifest_sha256: ctx.manifest.hash.clone(),
        clip_id: clip.clip_id.clone(),
        media_path: clip.media_path.display().to_string(),
        plan: fp,
        frames: names,
    };

    let previous: Option<PlanFile> =
        std::fs::read_to_string(&plan_path).ok().and_then(|t| serde_json::from_str(&t).ok());
    let frames_present = (0..record.plan.len()).all(|i| layout.frame_path(&clip.clip_id, i).exists());
    if let Some(prev) = previous {
        if prev.plan == record.plan && prev.media_path == record.media_path && frames_present {
            if prev.manifest_sha256 != record.manifest_sha256 {
                write_json(&plan_path, &record)?;
            }
            return Ok(Sampled::Reused);
        }
    }

    let frames = extract_frames(&ctx.manifest.decoder, &clip.media_path, &record.plan)
        .map_err(|e| anyhow::anyhow!("clip {}: {e}", clip.clip_id))?;
    for (i, bytes) in frames.iter().enumerate() {
        super::write_text_bytes(&layout.frame_path(&clip.clip_id, i), bytes)?;
    }
    // Frames left over from an earlier, longer plan.
    if let Ok(entries) = std::fs::read_dir(layout.frames_dir(&clip.clip_id)) {
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with("frame_") && name.ends_with(".jpg") && !record.frames.contains(&name) {
                let _ = std::fs::remove_file(entry.path());
            }
        }
    }
    write_json(&plan_path, &record)?;
    Ok(Sampled::Extracted)
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let clips = clips(ctx)?;
    log::info!("sampling {} clips with {}", clips.len(), ctx.manifest.framing.name());
    let results = ctx.exec().map(&clips, |clip| sample_clip(ctx, clip));
    let mut outcome = Outcome::default();
    let (mut extracted, mut reused) = (0, 0);
    for r in results {
        match r {
            Ok(Sampled::Extracted) => extracted += 1,
            Ok(Sampled::Reused) => reused += 1,
            Err(e) => outcome.fail(format!("{e:#}")),
        }
    }
    log::info!("sample: {extracted} extracted, {reused} already up to date, {} failed", outcome.failures.len());
    Ok(outcome)
}
