use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde_json::Value;
use tvlens_core::eval::{render_markdown, report_rows, Table};

use super::evaluate::RunsFile;
use super::write_text;
use crate::{Ctx, Outcome};

fn evaluation_section(ctx: &Ctx, out: &mut String) -> Result<bool> {
    let path = ctx.layout.runs_path();
    if !path.exists() {
        return Ok(false);
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let runs: RunsFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if runs.manifest_sha256 != ctx.manifest.hash {
        log::warn!("{} was produced under a different manifest; rerun `tvlens evaluate`", path.display());
    }
    out.push_str("## Evaluation\n\n");
    out.push_str("Weighted averages over classes by support; entries marked -- are undefined.\n\n");
    for table in Table::ALL {
        out.push_str(&render_markdown(table, &report_rows(&runs.runs, table), None));
        out.push('\n');
    }
    out.push_str("### Cells\n\n| Model | Visual | Input | Scored | Missing gold | Failed requests |\n|---|---|---|--:|--:|--:|\n");
    for c in &runs.cells {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            c.model_id,
            c.input_config.visual_mode,
            c.input_config.name(),
            c.scored,
            c.skipped_missing_gold,
            c.failed_requests
        );
    }
    out.push('\n');
    Ok(true)
}

fn audience_section(ctx: &Ctx, out: &mut String) -> Result<bool> {
    let dir = ctx.layout.audience_dir();
    let gaps_path = dir.join("cohort_gaps.csv");
    let guests_path = dir.join("guest_stats.json");
    if !gaps_path.exists() || !guests_path.exists() {
        return Ok(false);
    }
    out.push_str("## Audience\n\n### Largest cohort gaps\n\n| Topic | 15-34 | 35-54 | 55+ | Gap |\n|---|--:|--:|--:|--:|\n");
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&gaps_path)?;
    for rec in reader.records() {
        let rec = rec?;
        let num = |i: usize| rec.get(i).and_then(|v| v.parse::<f64>().ok()).map_or("--".into(), |v| format!("{v:.3}"));
        let _ = writeln!(out, "| {} | {} | {} | {} | {} |", &rec[0], num(1), num(2), num(3), num(4));
    }
    let guests: Value = serde_json::from_str(&std::fs::read_to_string(&guests_path)?)?;
    let _ = write!(
        out,
        "\n### Guests\n\n{} unique guests, {} occurrences.",
        guests["unique_guests"], guests["total_occurrences"]
    );
    if let Some(p) = guests["pct_occurrences_by_gender"]["male"].as_f64() {
        let _ = write!(out, " Male share of occurrences: {p:.1}%.");
    }
    if let Some(p) = guests["pct_minutes_exclusively_male"].as_f64() {
        let _ = write!(out, " Minutes with only male guests: {p:.1}%.");
    }
    out.push_str("\n\nCharts: `audience/topic_shares.svg`, `audience/cohort_gaps.svg`, `audience/amr_<episode>.svg`.\n");
    Ok(true)
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let mut out = format!("<!-- {} -->\n# tvlens report\n\n", ctx.manifest.stamp());
    let eval = evaluation_section(ctx, &mut out)?;
    let audience = audience_section(ctx, &mut out)?;
    if !eval && !audience {
        bail!(
            "nothing to report under {}: run `tvlens evaluate` or `tvlens audience` first",
            ctx.layout.root().display()
        );
    }
    write_text(&ctx.layout.report_path(), &out)?;
    log::info!("wrote {}", ctx.layout.report_path().display());
    Ok(Outcome::default())
}
