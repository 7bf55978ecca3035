use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::FrameError;

/// Histogram-difference shot detector settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotBoundaryConfig {
    /// Bins per color channel.
    pub histogram_bins: usize,
    pub distance_threshold: f64,
    pub min_shot_len_s: f64,
}

impl Default for ShotBoundaryConfig {
    fn default() -> Self {
        ShotBoundaryConfig { histogram_bins: 32, distance_threshold: 0.3, min_shot_len_s: 1.0 }
    }
}

impl ShotBoundaryConfig {
    pub fn validate(&self) -> Result<(), FrameError> {
        if self.histogram_bins < 8 {
            return Err(FrameError::InvalidStrategy("histogram_bins must be at least 8".into()));
        }
        if self.distance_threshold.is_nan() || self.distance_threshold <= 0.0 {
            return Err(FrameError::InvalidStrategy("distance_threshold must be positive".into()));
        }
        if self.min_shot_len_s.is_nan() || self.min_shot_len_s <= 0.0 {
            return Err(FrameError::InvalidStrategy("min_shot_len_s must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeature {
    pub timestamp_s: f64,
    pub histogram: Vec<f64>,
}

/// Concatenated per-channel RGB histogram with `bins` buckets per channel.
pub fn color_histogram(img: &RgbImage, bins: usize) -> Vec<f64> {
    let bins = bins.max(1);
    let mut hist = vec![0.0; bins * 3];
    for px in img.pixels() {
        for (c, &v) in px.0.iter().enumerate() {
            let b = (v as usize * bins) / 256;
            hist[c * bins + b] += 1.0;
        }
    }
    hist
}

/// Chi-squared distance between mass-normalized histograms, in `[0, 1]`.
pub fn histogram_distance(a: &[f64], b: &[f64]) -> f64 {
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    match (sa > 0.0, sb > 0.0) {
        (false, false) => return 0.0,
        (true, false) | (false, true) => return 1.0,
        _ => {}
    }
    let mut d = 0.0;
    for (x, y) in a.iter().zip(b) {
        let p = x / sa;
        let q = y / sb;
        if p + q > 0.0 {
            d += (p - q) * (p - q) / (p + q);
        }
    }
    0.5 * d
}

/// Returns shot boundaries in seconds.
///
/// A boundary is placed at a feature whose distance from its predecessor
/// exceeds the threshold, provided the shot it closes is at least
/// `min_shot_len_s` long.
pub fn detect_shots(
    features: &[FrameFeature],
    config: &ShotBoundaryConfig,
) -> Result<Vec<f64>, FrameError> {
    config.validate()?;
    if features.len() < 2 {
        return Err(FrameError::InsufficientSignal(features.len()));
    }
    let mut boundaries = Vec::new();
    let mut shot_start = features[0].timestamp_s.min(0.0);
    for pair in features.windows(2) {
        let d = histogram_distance(&pair[0].histogram, &pair[1].histogram);
        let t = pair[1].timestamp_s;
        if d > config.distance_threshold && t - shot_start >= config.min_shot_len_s {
            boundaries.push(t);
            shot_start = t;
        }
    }
    Ok(boundaries)
}
