//! Frame-timestamp planning and extraction.

mod extract;
mod plan;
mod shots;

use serde::{Deserialize, Serialize};

pub use extract::{extract_frames, plan_shots_from_media, FrameDecoder, SHOT_PROBE_FPS};
pub use plan::{plan, plan_shot_based, plan_stratified, plan_uniform};
pub use shots::{color_histogram, detect_shots, histogram_distance, FrameFeature, ShotBoundaryConfig};

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("clip duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("invalid framing strategy: {0}")]
    InvalidStrategy(String),
    #[error("shot detection needs at least two features, got {0}")]
    InsufficientSignal(usize),
    #[error("shot-based plans need boundaries; use plan_shot_based")]
    NeedsBoundaries,
    #[error("frame decoder {program:?} unavailable: {reason}")]
    DecoderUnavailable { program: String, reason: String },
    #[error("media file not found: {0}")]
    MediaNotFound(String),
    #[error("could not extract frame at {timestamp_s:.3}s: {reason}")]
    FrameExtractionError { timestamp_s: f64, reason: String },
}

pub const DEFAULT_BUDGET: usize = 18;
pub const DEFAULT_SEGMENT_LEN_S: f64 = 10.0;

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_segment_len() -> f64 {
    DEFAULT_SEGMENT_LEN_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FramingStrategy {
    Uniform {
        fps: f64,
        #[serde(default = "default_budget")]
        budget: usize,
    },
    Stratified {
        per_segment: u32,
        #[serde(default = "default_segment_len")]
        segment_len_s: f64,
        #[serde(default = "default_budget")]
        budget: usize,
    },
    ShotBased {
        #[serde(default = "default_budget")]
        budget: usize,
        #[serde(default)]
        detector: ShotBoundaryConfig,
    },
}

impl Default for FramingStrategy {
    /// 0.2 fps uniform sampling, 12 frames on a one-minute clip.
    fn default() -> Self {
        FramingStrategy::Uniform { fps: 0.2, budget: DEFAULT_BUDGET }
    }
}

impl FramingStrategy {
    /// The seven strategies compared when selecting the framing component.
    pub fn studied() -> Vec<FramingStrategy> {
        let mut out: Vec<FramingStrategy> = [0.1, 0.2, 0.3]
            .into_iter()
            .map(|fps| FramingStrategy::Uniform { fps, budget: DEFAULT_BUDGET })
            .collect();
        out.extend((1..=3).map(|per_segment| FramingStrategy::Stratified {
            per_segment,
            segment_len_s: DEFAULT_SEGMENT_LEN_S,
            budget: DEFAULT_BUDGET,
        }));
        out.push(FramingStrategy::ShotBased {
            budget: DEFAULT_BUDGET,
            detector: ShotBoundaryConfig::default(),
        });
        out
    }

    pub fn budget(&self) -> usize {
        match self {
            FramingStrategy::Uniform { budget, .. }
            | FramingStrategy::Stratified { budget, .. }
            | FramingStrategy::ShotBased { budget, .. } => *budget,
        }
    }

    pub fn name(&self) -> String {
        match self {
            FramingStrategy::Uniform { fps, .. } => format!("uniform_{fps}fps"),
            FramingStrategy::Stratified { per_segment, segment_len_s, .. } => {
                format!("stratified_{per_segment}per{segment_len_s}s")
            }
            FramingStrategy::ShotBased { .. } => "shot_based".to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        let invalid = |m: &str| Err(FrameError::InvalidStrategy(m.to_string()));
        if self.budget() < 1 {
            return invalid("budget must be at least 1");
        }
        match self {
            FramingStrategy::Uniform { fps, .. } if !(*fps > 0.0 && fps.is_finite()) => {
                invalid("fps must be positive")
            }
            FramingStrategy::Stratified { per_segment, segment_len_s, .. } => {
                if !(1..=3).contains(per_segment) {
                    invalid("per_segment must be between 1 and 3")
                } else if !(*segment_len_s > 0.0 && segment_len_s.is_finite()) {
                    invalid("segment_len_s must be positive")
                } else {
                    Ok(())
                }
            }
            FramingStrategy::ShotBased { detector, .. } => detector.validate(),
            _ => Ok(()),
        }
    }
}

/// Ordered frame timestamps for one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePlan {
    pub timestamps_s: Vec<f64>,
    pub duration_s: f64,
    pub strategy: FramingStrategy,
}

impl FramePlan {
    pub fn len(&self) -> usize {
        self.timestamps_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_s.is_empty()
    }

    /// Checks ordering, range and budget.
    pub fn is_well_formed(&self) -> bool {
        self.timestamps_s.len() <= self.strategy.budget()
            && self.timestamps_s.windows(2).all(|w| w[0] < w[1])
            && self.timestamps_s.iter().all(|&t| t >= 0.0 && t < self.duration_s)
    }
}
