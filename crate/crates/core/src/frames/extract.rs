use std::path::Path;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{color_histogram, detect_shots, plan_shot_based, FrameError, FrameFeature, FramePlan, ShotBoundaryConfig};

/// External single-frame decoder invoked once per timestamp.
///
/// Argument templates may reference `{input}`, `{t}` (seconds, three
/// decimals) and `{output}`. With `{output}` present the image is read from
/// that temporary file, otherwise from stdout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameDecoder {
    pub program: String,
    pub args: Vec<String>,
}

impl Default for FrameDecoder {
    fn default() -> Self {
        let args = [
            "-v", "error", "-ss", "{t}", "-i", "{input}", "-frames:v", "1", "-f", "image2pipe",
            "-c:v", "mjpeg", "-",
        ];
        FrameDecoder { program: "ffmpeg".into(), args: args.iter().map(|s| s.to_string()).collect() }
    }
}

impl FrameDecoder {
    fn render_args(&self, input: &Path, t: f64, output: Option<&Path>) -> Vec<String> {
        let t = format!("{t:.3}");
        let input = input.display().to_string();
        let output = output.map(|p| p.display().to_string()).unwrap_or_default();
        self.args
            .iter()
            .map(|a| a.replace("{input}", &input).replace("{t}", &t).replace("{output}", &output))
            .collect()
    }

    fn writes_file(&self) -> bool {
        self.args.iter().any(|a| a.contains("{output}"))
    }

    /// Decodes a single frame as JPEG bytes.
    pub fn frame_at(&self, media: &Path, t: f64) -> Result<Vec<u8>, FrameError> {
        let tmp = if self.writes_file() {
            Some(std::env::temp_dir().join(format!(
                "tvlens-frame-{}-{}-{}.jpg",
                std::process::id(),
                unique_suffix(),
                (t * 1000.0).round() as i64
            )))
        } else {
            None
        };
        let output = Command::new(&self.program)
            .args(self.render_args(media, t, tmp.as_deref()))
            .stdin(Stdio::null())
            .output()
            .map_err(|e| FrameError::DecoderUnavailable {
                program: self.program.clone(),
                reason: e.to_string(),
            })?;
        let failure = |reason: String| FrameError::FrameExtractionError { timestamp_s: t, reason };
        if !output.status.success() {
            if let Some(p) = &tmp {
                let _ = std::fs::remove_file(p);
            }
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(failure(format!("decoder exited with {}: {}", output.status, stderr.trim())));
        }
        let bytes = match &tmp {
            Some(p) => {
                let bytes = std::fs::read(p).map_err(|e| failure(e.to_string()));
                let _ = std::fs::remove_file(p);
                bytes?
            }
            None => output.stdout,
        };
        to_jpeg(bytes).map_err(failure)
    }
}

fn unique_suffix() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static NEXT: AtomicU64 = AtomicU64::new(0);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

fn to_jpeg(bytes: Vec<u8>) -> Result<Vec<u8>, String> {
    if bytes.is_empty() {
        return Err("decoder produced no image".into());
    }
    if bytes.starts_with(&[0xFF, 0xD8]) {
        return Ok(bytes);
    }
    let img = image::load_from_memory(&bytes).map_err(|e| format!("undecodable frame: {e}"))?;
    let mut out = std::io::Cursor::new(Vec::new());
    img.to_rgb8()
        .write_to(&mut out, image::ImageFormat::Jpeg)
        .map_err(|e| e.to_string())?;
    Ok(out.into_inner())
}

/// Extracts one JPEG per planned timestamp, in plan order.
pub fn extract_frames(
    decoder: &FrameDecoder,
    media: &Path,
    plan: &FramePlan,
) -> Result<Vec<Vec<u8>>, FrameError> {
    if !media.exists() {
        return Err(FrameError::MediaNotFound(media.display().to_string()));
    }
    plan.timestamps_s
        .iter()
        .map(|&t| {
            if t >= plan.duration_s {
                return Err(FrameError::FrameExtractionError {
                    timestamp_s: t,
                    reason: format!("beyond media duration {}s", plan.duration_s),
                });
            }
            decoder.frame_at(media, t)
        })
        .collect()
}

/// Probe rate used to find shot boundaries in a clip.
pub const SHOT_PROBE_FPS: f64 = 2.0;

/// Shot-based plan for a media file: probes frames at [`SHOT_PROBE_FPS`],
/// detects boundaries from colour histograms and keeps one frame per shot.
pub fn plan_shots_from_media(
    decoder: &FrameDecoder,
    media: &Path,
    duration_s: f64,
    budget: usize,
    detector: &ShotBoundaryConfig,
) -> Result<FramePlan, FrameError> {
    detector.validate()?;
    let probes = super::plan_uniform(duration_s, SHOT_PROBE_FPS, usize::MAX)?;
    let frames = extract_frames(decoder, media, &probes)?;
    let mut features = Vec::with_capacity(frames.len());
    for (t, bytes) in probes.timestamps_s.iter().zip(frames) {
        let img = image::load_from_memory(&bytes).map_err(|e| FrameError::FrameExtractionError {
            timestamp_s: *t,
            reason: format!("undecodable probe frame: {e}"),
        })?;
        features.push(FrameFeature { timestamp_s: *t, histogram: color_histogram(&img.to_rgb8(), detector.histogram_bins) });
    }
    let boundaries = detect_shots(&features, detector)?;
    let mut plan = plan_shot_based(&boundaries, duration_s, budget)?;
    plan.strategy = super::FramingStrategy::ShotBased { budget, detector: detector.clone() };
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_substitution() {
        let dec = FrameDecoder {
            program: "x".into(),
            args: vec!["-ss".into(), "{t}".into(), "{input}".into(), "out={output}".into()],
        };
        let args = dec.render_args(Path::new("/m.mp4"), 2.5, Some(Path::new("/tmp/o.jpg")));
        assert_eq!(args, vec!["-ss", "2.500", "/m.mp4", "out=/tmp/o.jpg"]);
        assert!(dec.writes_file());
        assert!(!FrameDecoder::default().writes_file());
    }

    #[test]
    fn missing_program_is_unavailable() {
        let dec = FrameDecoder { program: "definitely-not-a-decoder-xyz".into(), args: vec![] };
        let err = dec.frame_at(Path::new("/dev/null"), 1.0).unwrap_err();
        assert!(matches!(err, FrameError::DecoderUnavailable { .. }));
    }

    #[test]
    fn nonzero_exit_carries_timestamp() {
        let dec = FrameDecoder { program: "false".into(), args: vec![] };
        match dec.frame_at(Path::new("/dev/null"), 7.5).unwrap_err() {
            FrameError::FrameExtractionError { timestamp_s, .. } => assert_eq!(timestamp_s, 7.5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
