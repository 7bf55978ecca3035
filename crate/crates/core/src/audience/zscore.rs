use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AudienceError, AudienceMinute, Cohort};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZMinute {
    pub episode_id: String,
    pub minute_index: u32,
    pub cohort: Cohort,
    pub amr_norm: f64,
    pub z: f64,
}

fn standardize(episode_id: &str, cohort: Cohort, group: &[&AudienceMinute]) -> Result<Vec<ZMinute>, AudienceError> {
    if group.len() < 2 {
        return Err(AudienceError::InsufficientMinutes {
            episode_id: episode_id.to_string(),
            cohort,
            count: group.len(),
        });
    }
    let n = group.len() as f64;
    let mean = group.iter().map(|m| m.amr_norm).sum::<f64>() / n;
    let var = group.iter().map(|m| (m.amr_norm - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let constant = group.iter().all(|m| m.amr_norm == group[0].amr_norm) || sd == 0.0;
    if constant {
        log::warn!("episode {episode_id:?} cohort {cohort}: constant audience, z-scores set to 0");
    }
    Ok(group
        .iter()
        .map(|m| ZMinute {
            episode_id: m.episode_id.clone(),
            minute_index: m.minute_index,
            cohort,
            amr_norm: m.amr_norm,
            z: if constant { 0.0 } else { (m.amr_norm - mean) / sd },
        })
        .collect())
}

/// Intra-episode z-scores per cohort, with population standard deviation.
///
/// Advertising minutes are dropped first. Output is ordered by episode,
/// cohort and minute. Groups are processed independently under `exec`.
pub fn zscore_normalize(minutes: &[AudienceMinute], exec: Execution) -> Result<Vec<ZMinute>, AudienceError> {
    let mut groups: BTreeMap<(&str, Cohort), Vec<&AudienceMinute>> = BTreeMap::new();
    for m in minutes.iter().filter(|m| !m.is_advertising) {
        groups.entry((m.episode_id.as_str(), m.cohort)).or_default().push(m);
    }
    let mut groups: Vec<_> = groups.into_iter().collect();
    for (_, g) in groups.iter_mut() {
        g.sort_by_key(|m| m.minute_index);
    }
    let results = exec.map(&groups, |((episode, cohort), g)| standardize(episode, *cohort, g));
    let mut out = Vec::with_capacity(minutes.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(values: &[f64]) -> Vec<AudienceMinute> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| AudienceMinute {
                episode_id: "ep".into(),
                minute_index: i as u32,
                cohort: Cohort::Adults,
                amr_norm: v,
                is_advertising: false,
            })
            .collect()
    }

    #[test]
    fn population_sigma() {
        let z = zscore_normalize(&group(&[1.0, 2.0, 3.0]), Execution::Sequential).unwrap();
        let s = (1.5f64).sqrt();
        let expected = [-s, 0.0, s];
        for (a, b) in z.iter().zip(expected) {
            assert!((a.z - b).abs() < 1e-12, "{} vs {b}", a.z);
        }
        assert!((z[2].z - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn constant_group_is_zero() {
        let z = zscore_normalize(&group(&[0.3, 0.3, 0.3]), Execution::Sequential).unwrap();
        assert!(z.iter().all(|m| m.z == 0.0));
    }

    #[test]
    fn advertising_is_excluded_before_grouping() {
        let mut g = group(&[1.0, 2.0, 100.0]);
        g[2].is_advertising = true;
        let z = zscore_normalize(&g, Execution::Sequential).unwrap();
        assert_eq!(z.len(), 2);
        assert_eq!((z[0].z, z[1].z), (-1.0, 1.0));
    }

    #[test]
    fn singleton_group_fails() {
        let err = zscore_normalize(&group(&[1.0]), Execution::Sequential).unwrap_err();
        assert!(matches!(err, AudienceError::InsufficientMinutes { count: 1, .. }));
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut all = Vec::new();
        for ep in 0..20 {
            for mut m in group(&[1.0, 4.0, 2.5, 9.0, 0.5]) {
                m.episode_id = format!("ep{ep}");
                m.amr_norm *= ep as f64 + 1.0;
                all.push(m);
            }
        }
        let a = zscore_normalize(&all, Execution::Sequential).unwrap();
        let b = zscore_normalize(&all, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
