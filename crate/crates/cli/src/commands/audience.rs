use std::collections::BTreeMap;

use anyhow::{Context, Result};
use serde::Serialize;
use tvlens_core::audience::{
    canonicalize_topics, cohort_gap_ranking, eligible, guest_stats, load_audience_csv, load_minute_annotations,
    load_registry, svg, to_csv, topic_minutes_distribution, topic_sensitivity, zscore_normalize, GuestRegistry,
    TopicSensitivity,
};
use tvlens_core::fsutil::sanitize;

use super::{write_json, write_text};
use crate::{Ctx, Outcome};

pub const OUTPUTS: [&str; 6] = [
    "zscores.csv",
    "topic_sensitivity.csv",
    "topic_sensitivity_ranked.csv",
    "cohort_gaps.csv",
    "topic_distribution.csv",
    "guest_stats.json",
];

fn stamped_csv<T: Serialize>(stamp: &str, rows: &[T]) -> Result<String> {
    Ok(format!("# {stamp}\n{}", to_csv(rows)?))
}

#[derive(Serialize)]
struct GuestStatsFile<'a> {
    manifest_sha256: &'a str,
    registry_size: usize,
    #[serde(flatten)]
    stats: tvlens_core::audience::GuestStats,
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let inputs = ctx.manifest.audience.as_ref().context("the manifest has no [audience] section")?;
    let minutes = load_audience_csv(&inputs.minutes)?;
    let mut annotations = load_minute_annotations(&inputs.annotations)?;
    let tax = ctx.manifest.taxonomies()?;
    canonicalize_topics(&mut annotations, &tax.topic)?;
    let registry = match &inputs.registry {
        Some(p) => load_registry(p)?,
        None => {
            log::warn!("no guest registry configured; every guest counts as unknown gender");
            GuestRegistry::default()
        }
    };

    let z = zscore_normalize(&minutes, ctx.exec())?;
    let sens = topic_sensitivity(&z, &annotations)?;
    let mut ranked: Vec<TopicSensitivity> = eligible(&sens, inputs.min_support);
    ranked.sort_by(|a, b| a.cohort.cmp(&b.cohort).then(b.mean_z.total_cmp(&a.mean_z)).then(a.topic.cmp(&b.topic)));
    let gaps = cohort_gap_ranking(&eligible(&sens, inputs.min_support), inputs.top_k);
    let shares = topic_minutes_distribution(&annotations);
    let guests = guest_stats(&annotations, &registry);

    let stamp = ctx.manifest.stamp();
    let dir = ctx.layout.audience_dir();
    write_text(&dir.join("zscores.csv"), &stamped_csv(&stamp, &z)?)?;
    write_text(&dir.join("topic_sensitivity.csv"), &stamped_csv(&stamp, &sens)?)?;
    write_text(&dir.join("topic_sensitivity_ranked.csv"), &stamped_csv(&stamp, &ranked)?)?;
    write_text(&dir.join("cohort_gaps.csv"), &stamped_csv(&stamp, &gaps)?)?;
    write_text(&dir.join("topic_distribution.csv"), &stamped_csv(&stamp, &shares)?)?;
    write_json(
        &dir.join("guest_stats.json"),
        &GuestStatsFile { manifest_sha256: &ctx.manifest.hash, registry_size: registry.len(), stats: guests },
    )?;

    let share_bars: Vec<(String, f64)> = shares.iter().map(|s| (s.topic.clone(), 100.0 * s.share)).collect();
    write_text(&dir.join("topic_shares.svg"), &svg::bar_chart("Airtime share by topic (%)", &share_bars))?;
    let gap_bars: Vec<(String, f64)> = gaps.iter().map(|g| (g.topic.clone(), g.gap)).collect();
    write_text(&dir.join("cohort_gaps.svg"), &svg::bar_chart("Cohort gap (max - min mean z)", &gap_bars))?;

    type Series = (String, Vec<(u32, f64)>);
    let mut curves: BTreeMap<&str, Vec<Series>> = BTreeMap::new();
    for m in &z {
        let series = curves.entry(&m.episode_id).or_default();
        if series.last().map(|s| s.0.as_str()) != Some(m.cohort.display_name()) {
            series.push((m.cohort.display_name().to_string(), Vec::new()));
        }
        series.last_mut().unwrap().1.push((m.minute_index, m.amr_norm));
    }
    for (episode, series) in &curves {
        let title = format!("Minute audience, episode {episode}");
        write_text(&dir.join(format!("amr_{}.svg", sanitize(episode))), &svg::line_chart(&title, series))?;
    }

    log::info!(
        "audience: {} z-scored minutes, {} topic/cohort pairs, {} ranked gaps",
        z.len(),
        sens.len(),
        gaps.len()
    );
    Ok(Outcome::default())
}
