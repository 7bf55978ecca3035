use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{AudienceError, Cohort, Gender, GuestRegistry, MinuteAnnotation, ZMinute};
use crate::eval::person_key;

pub const DEFAULT_MIN_SUPPORT: usize = 10;
pub const DEFAULT_GAP_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSensitivity {
    pub topic: String,
    pub cohort: Cohort,
    pub mean_z: f64,
    pub minute_support: usize,
}

/// Mean z-score of every (topic, cohort) pair over the joined minutes.
///
/// Sorted by topic then cohort. Nothing is filtered; see [`eligible`].
pub fn topic_sensitivity(z: &[ZMinute], annotations: &[MinuteAnnotation]) -> Result<Vec<TopicSensitivity>, AudienceError> {
    let topics: HashMap<(&str, u32), &str> = annotations
        .iter()
        .filter(|a| !a.is_advertising)
        .map(|a| ((a.episode_id.as_str(), a.minute_index), a.topic.as_str()))
        .collect();
    let mut acc: BTreeMap<(&str, Cohort), (f64, usize)> = BTreeMap::new();
    for m in z {
        if let Some(topic) = topics.get(&(m.episode_id.as_str(), m.minute_index)) {
            let e = acc.entry((topic, m.cohort)).or_default();
            e.0 += m.z;
            e.1 += 1;
        }
    }
    if acc.is_empty() {
        return Err(AudienceError::EmptyJoin);
    }
    Ok(acc
        .into_iter()
        .map(|((topic, cohort), (sum, n))| TopicSensitivity {
            topic: topic.to_string(),
            cohort,
            mean_z: sum / n as f64,
            minute_support: n,
        })
        .collect())
}

/// Entries with at least `min_support` minutes, for ranked outputs.
pub fn eligible(sensitivities: &[TopicSensitivity], min_support: usize) -> Vec<TopicSensitivity> {
    sensitivities.iter().filter(|s| s.minute_support >= min_support).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortGap {
    pub topic: String,
    pub young_15_34: f64,
    pub adults_35_54: f64,
    pub seniors_55p: f64,
    pub gap: f64,
}

/// Top `k` topics by spread of cohort mean z-scores (max minus min).
///
/// Topics lacking any cohort are skipped with a warning. Ties keep
/// lexicographic topic order.
pub fn cohort_gap_ranking(sensitivities: &[TopicSensitivity], k: usize) -> Vec<CohortGap> {
    let mut by_topic: BTreeMap<&str, BTreeMap<Cohort, f64>> = BTreeMap::new();
    for s in sensitivities {
        by_topic.entry(&s.topic).or_default().insert(s.cohort, s.mean_z);
    }
    let mut gaps: Vec<CohortGap> = by_topic
        .into_iter()
        .filter_map(|(topic, means)| {
            if means.len() < Cohort::ALL.len() {
                let missing: Vec<_> = Cohort::ALL.iter().filter(|c| !means.contains_key(c)).map(|c| c.as_str()).collect();
                log::warn!("topic {topic:?} has no value for {}; left out of the gap ranking", missing.join(", "));
                return None;
            }
            let values: Vec<f64> = means.values().copied().collect();
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            Some(CohortGap {
                topic: topic.to_string(),
                young_15_34: means[&Cohort::Young],
                adults_35_54: means[&Cohort::Adults],
                seniors_55p: means[&Cohort::Seniors],
                gap: max - min,
            })
        })
        .collect();
    // stable sort keeps the lexicographic order from the map on ties
    gaps.sort_by(|a, b| b.gap.total_cmp(&a.gap));
    gaps.truncate(k);
    gaps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderStats {
    pub unique: usize,
    pub occurrences: usize,
    pub avg_recurrence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuestStats {
    pub unique_guests: usize,
    pub total_occurrences: usize,
    pub per_gender: BTreeMap<Gender, GenderStats>,
    /// Percent of all occurrences, 0 to 100.
    pub pct_occurrences_by_gender: BTreeMap<Gender, f64>,
    /// Percent of annotated minutes whose guests are all male (at least one).
    pub pct_minutes_exclusively_male: Option<f64>,
}

/// Guest participation counts. One occurrence is one guest in one minute.
pub fn guest_stats(annotations: &[MinuteAnnotation], registry: &GuestRegistry) -> GuestStats {
    let mut occurrences: BTreeMap<String, (Gender, usize)> = BTreeMap::new();
    let mut warned = BTreeSet::new();
    let mut minutes = 0usize;
    let mut male_only = 0usize;
    for ann in annotations.iter().filter(|a| !a.is_advertising) {
        minutes += 1;
        let guests: BTreeSet<String> = ann.guests.iter().filter_map(|g| person_key(g)).collect();
        let mut all_male = !guests.is_empty();
        for key in guests {
            let gender = registry.gender(&key).unwrap_or_else(|| {
                if warned.insert(key.clone()) {
                    log::warn!("guest {key:?} is not in the registry; counted as unknown gender");
                }
                Gender::Unknown
            });
            all_male &= gender == Gender::Male;
            occurrences.entry(key).or_insert((gender, 0)).1 += 1;
        }
        if all_male {
            male_only += 1;
        }
    }

    let total: usize = occurrences.values().map(|(_, n)| n).sum();
    let mut per_gender: BTreeMap<Gender, GenderStats> = BTreeMap::new();
    for (gender, n) in occurrences.values() {
        let e = per_gender.entry(*gender).or_insert(GenderStats { unique: 0, occurrences: 0, avg_recurrence: None });
        e.unique += 1;
        e.occurrences += n;
    }
    for s in per_gender.values_mut() {
        s.avg_recurrence = Some(s.occurrences as f64 / s.unique as f64);
    }
    let pct_occurrences_by_gender = if total == 0 {
        BTreeMap::new()
    } else {
        per_gender.iter().map(|(g, s)| (*g, 100.0 * s.occurrences as f64 / total as f64)).collect()
    };
    GuestStats {
        unique_guests: occurrences.len(),
        total_occurrences: total,
        per_gender,
        pct_occurrences_by_gender,
        pct_minutes_exclusively_male: (minutes > 0).then(|| 100.0 * male_only as f64 / minutes as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicShare {
    pub topic: String,
    pub minutes: usize,
    pub share: f64,
}

/// Airtime per topic over non-advertising minutes, largest first.
pub fn topic_minutes_distribution(annotations: &[MinuteAnnotation]) -> Vec<TopicShare> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in annotations.iter().filter(|a| !a.is_advertising) {
        *counts.entry(&a.topic).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let mut shares: Vec<TopicShare> = counts
        .into_iter()
        .map(|(topic, minutes)| TopicShare { topic: topic.to_string(), minutes, share: minutes as f64 / total as f64 })
        .collect();
    shares.sort_by_key(|s| std::cmp::Reverse(s.minutes));
    shares
}
