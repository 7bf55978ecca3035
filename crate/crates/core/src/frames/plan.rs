use super::{FrameError, FramePlan, FramingStrategy, ShotBoundaryConfig};

// Absorbs representation error in products like 60 * 0.3.
const EPS: f64 = 1e-9;

fn check_duration(duration_s: f64) -> Result<(), FrameError> {
    if duration_s > 0.0 && duration_s.is_finite() {
        Ok(())
    } else {
        Err(FrameError::InvalidDuration(duration_s))
    }
}

/// `count` timestamps at the centers of equal slots of `[start, end)`.
fn centers(start: f64, end: f64, count: usize) -> impl Iterator<Item = f64> {
    let slot = (end - start) / count.max(1) as f64;
    (0..count).map(move |i| start + (i as f64 + 0.5) * slot)
}

pub fn plan_uniform(duration_s: f64, fps: f64, budget: usize) -> Result<FramePlan, FrameError> {
    check_duration(duration_s)?;
    let strategy = FramingStrategy::Uniform { fps, budget };
    strategy.validate()?;
    let n = ((duration_s * fps + EPS).floor() as usize).min(budget);
    Ok(FramePlan { timestamps_s: centers(0.0, duration_s, n).collect(), duration_s, strategy })
}

pub fn plan_stratified(
    duration_s: f64,
    per_segment: u32,
    segment_len_s: f64,
    budget: usize,
) -> Result<FramePlan, FrameError> {
    check_duration(duration_s)?;
    let strategy = FramingStrategy::Stratified { per_segment, segment_len_s, budget };
    strategy.validate()?;

    let segments = ((duration_s / segment_len_s) - EPS).ceil().max(1.0) as usize;
    let mut timestamps = Vec::new();
    for k in 0..segments {
        let start = k as f64 * segment_len_s;
        let end = (start + segment_len_s).min(duration_s);
        let len = end - start;
        let count = if len >= segment_len_s - EPS {
            per_segment as usize
        } else {
            let share = (per_segment as f64 * len / segment_len_s).round() as usize;
            if len >= 2.0 {
                share.max(1)
            } else {
                share
            }
        };
        timestamps.extend(centers(start, end, count));
        if timestamps.len() >= budget {
            break;
        }
    }
    timestamps.truncate(budget);
    Ok(FramePlan { timestamps_s: timestamps, duration_s, strategy })
}

/// One frame at the midpoint of each shot, keeping the `budget` longest shots.
///
/// Boundaries outside `(0, duration_s)` are dropped and the rest sorted.
pub fn plan_shot_based(
    boundaries: &[f64],
    duration_s: f64,
    budget: usize,
) -> Result<FramePlan, FrameError> {
    check_duration(duration_s)?;
    let strategy = FramingStrategy::ShotBased { budget, detector: ShotBoundaryConfig::default() };
    strategy.validate()?;

    let mut cuts: Vec<f64> =
        boundaries.iter().copied().filter(|&b| b > 0.0 && b < duration_s).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    if cuts.len() != boundaries.len() {
        log::debug!("dropped {} boundaries outside the clip", boundaries.len() - cuts.len());
    }

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(0.0);
    edges.extend(cuts);
    edges.push(duration_s);
    let mut shots: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    if shots.len() > budget {
        // longest first, earlier shot wins ties
        shots.sort_by(|a, b| (b.1 - b.0).total_cmp(&(a.1 - a.0)).then(a.0.total_cmp(&b.0)));
        shots.truncate(budget);
        shots.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let timestamps = shots.iter().map(|(s, e)| (s + e) / 2.0).collect();
    Ok(FramePlan { timestamps_s: timestamps, duration_s, strategy })
}

/// Plans a uniform or stratified strategy. Shot-based plans depend on
/// detected boundaries and go through [`plan_shot_based`].
pub fn plan(strategy: &FramingStrategy, duration_s: f64) -> Result<FramePlan, FrameError> {
    match *strategy {
        FramingStrategy::Uniform { fps, budget } => plan_uniform(duration_s, fps, budget),
        FramingStrategy::Stratified { per_segment, segment_len_s, budget } => {
            plan_stratified(duration_s, per_segment, segment_len_s, budget)
        }
        FramingStrategy::ShotBased { .. } => Err(FrameError::NeedsBoundaries),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn uniform_default_is_twelve_centered_frames() {
        let plan = plan_uniform(60.0, 0.2, 18).unwrap();
        let expected: Vec<f64> = (0..12).map(|i| 2.5 + 5.0 * i as f64).collect();
        assert!(close(&plan.timestamps_s, &expected));
        assert!(plan.is_well_formed());
    }

    #[test]
    fn uniform_rates_and_budget() {
        assert_eq!(plan_uniform(60.0, 0.3, 18).unwrap().len(), 18);
        assert_eq!(plan_uniform(60.0, 0.1, 18).unwrap().len(), 6);
        assert_eq!(plan_uniform(60.0, 1.0, 18).unwrap().len(), 18);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(plan_uniform(0.0, 0.2, 18), Err(FrameError::InvalidDuration(_))));
        assert!(matches!(plan_uniform(60.0, 0.0, 18), Err(FrameError::InvalidStrategy(_))));
        assert!(matches!(plan_uniform(60.0, 0.2, 0), Err(FrameError::InvalidStrategy(_))));
        assert!(matches!(plan_stratified(60.0, 4, 10.0, 18), Err(FrameError::InvalidStrategy(_))));
        assert!(matches!(plan_stratified(-1.0, 1, 10.0, 18), Err(FrameError::InvalidDuration(_))));
    }

    #[test]
    fn stratified_examples() {
        let p = plan_stratified(60.0, 3, 10.0, 18).unwrap();
        assert_eq!(p.len(), 18);
        for seg in 0..6 {
            let lo = seg as f64 * 10.0;
            let n = p.timestamps_s.iter().filter(|&&t| t >= lo && t < lo + 10.0).count();
            assert_eq!(n, 3);
        }
        let p = plan_stratified(60.0, 1, 10.0, 18).unwrap();
        assert!(close(&p.timestamps_s, &[5.0, 15.0, 25.0, 35.0, 45.0, 55.0]));
        let p = plan_stratified(65.0, 3, 10.0, 18).unwrap();
        assert_eq!(p.len(), 18);
        assert!(p.timestamps_s.iter().all(|&t| t < 60.0));
    }

    #[test]
    fn stratified_partial_segment() {
        // 65 s, 1 per segment: 5 s tail gets round(0.5) = 1 frame at 62.5
        let p = plan_stratified(65.0, 1, 10.0, 18).unwrap();
        assert_eq!(p.len(), 7);
        assert!((p.timestamps_s[6] - 62.5).abs() < 1e-9);
        // 62 s tail of 2 s with 1 per segment: round(0.2) = 0, raised to 1
        let p = plan_stratified(62.0, 1, 10.0, 18).unwrap();
        assert_eq!(p.len(), 7);
        // 61 s tail of 1 s: round(0.1) = 0, below the 2 s floor
        let p = plan_stratified(61.0, 1, 10.0, 18).unwrap();
        assert_eq!(p.len(), 6);
    }

    #[test]
    fn shot_based_examples() {
        let p = plan_shot_based(&[], 60.0, 18).unwrap();
        assert!(close(&p.timestamps_s, &[30.0]));
        let p = plan_shot_based(&[20.0, 40.0], 60.0, 18).unwrap();
        assert!(close(&p.timestamps_s, &[10.0, 30.0, 50.0]));
    }

    #[test]
    fn shot_based_keeps_longest() {
        // 25 shots: lengths alternate 1 s and 3 s (13 short, 12 long) = 13 + 36 = 49 s
        let mut boundaries = Vec::new();
        let mut t = 0.0;
        let mut lengths = Vec::new();
        for i in 0..25 {
            let len = if i % 2 == 0 { 1.0 } else { 3.0 };
            lengths.push((t, len));
            t += len;
            if i < 24 {
                boundaries.push(t);
            }
        }
        let p = plan_shot_based(&boundaries, t, 18).unwrap();
        assert_eq!(p.len(), 18);
        // all 12 long shots plus the 6 earliest short shots
        let mut expected: Vec<(f64, f64)> = lengths.iter().copied().filter(|s| s.1 == 3.0).collect();
        expected.extend(lengths.iter().copied().filter(|s| s.1 == 1.0).take(6));
        expected.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mids: Vec<f64> = expected.iter().map(|(s, l)| s + l / 2.0).collect();
        assert!(close(&p.timestamps_s, &mids));
        assert!(p.is_well_formed());
    }
}
