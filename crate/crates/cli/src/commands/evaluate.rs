use std::collections::HashMap;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tvlens_core::eval::{render_csv, render_markdown, report_rows, score_runs, RunInput, RunRecord, ScoredClip, Table};
use tvlens_core::gateway::MISSING_TOKENS;
use tvlens_core::parser::{InvalidReason, PredictedAnnotation};
use tvlens_core::prompt::InputConfiguration;
use tvlens_core::Annotation;

use super::annotate::PredictionRow;
use super::{clips, write_json, write_text};
use crate::manifest::Cell;
use crate::{Ctx, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub model_id: String,
    pub input_config: InputConfiguration,
    pub scored: usize,
    pub skipped_missing_gold: usize,
    pub failed_requests: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunsFile {
    pub manifest_sha256: String,
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellStats>,
}

fn load_cell(ctx: &Ctx, cell: &Cell, gold: &HashMap<&str, &Annotation>) -> Result<(RunInput, CellStats)> {
    let path = ctx.layout.predictions_path(&cell.model.model_id, &cell.config);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("no predictions at {}; run `tvlens annotate` first", path.display()))?;
    let mut stats = CellStats {
        model_id: cell.model.model_id.clone(),
        input_config: cell.config,
        scored: 0,
        skipped_missing_gold: 0,
        failed_requests: 0,
    };
    let mut clips = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: PredictionRow =
            serde_json::from_str(line).with_context(|| format!("{} line {}", path.display(), n + 1))?;
        if row.manifest_sha256 != ctx.manifest.hash {
            log::warn!("{}: clip {} was annotated under a different manifest", cell.label(), row.clip_id);
        }
        let Some(g) = gold.get(row.clip_id.as_str()) else {
            log::warn!("{}: clip {} has no gold annotation; skipped", cell.label(), row.clip_id);
            stats.skipped_missing_gold += 1;
            continue;
        };
        let prediction = match row.prediction {
            Some(p) => p,
            None => {
                stats.failed_requests += 1;
                PredictedAnnotation::all_invalid(InvalidReason::NoResponse, "")
            }
        };
        clips.push(ScoredClip {
            prediction,
            gold: (*g).clone(),
            input_tokens: row.input_tokens.unwrap_or(MISSING_TOKENS),
            latency_ms: row.latency_ms,
        });
    }
    stats.scored = clips.len();
    if stats.skipped_missing_gold > 0 {
        log::warn!("{}: {} clips skipped for missing gold", cell.label(), stats.skipped_missing_gold);
    }
    if clips.is_empty() {
        anyhow::bail!("{} has no scorable predictions", path.display());
    }
    Ok((RunInput { model_id: cell.model.model_id.clone(), input_config: cell.config, clips }, stats))
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let dataset = clips(ctx)?;
    let gold: HashMap<&str, &Annotation> =
        dataset.iter().filter_map(|c| c.gold.as_ref().map(|g| (c.clip_id.as_str(), g))).collect();
    let mut outcome = Outcome::default();
    let mut inputs = Vec::new();
    let mut stats = Vec::new();
    for cell in &ctx.manifest.cells {
        match load_cell(ctx, cell, &gold) {
            Ok((input, s)) => {
                inputs.push(input);
                stats.push(s);
            }
            Err(e) => outcome.fail(format!("{}: {e:#}", cell.label())),
        }
    }
    if inputs.is_empty() {
        anyhow::bail!("no sweep cell has predictions to evaluate");
    }
    let runs = score_runs(&inputs, ctx.exec())?;

    let stamp = ctx.manifest.stamp();
    let dir = ctx.layout.results_dir();
    for table in Table::ALL {
        let rows = report_rows(&runs, table);
        write_text(&dir.join(format!("{}.csv", table.name())), &render_csv(&rows, Some(&stamp)))?;
        write_text(&dir.join(format!("{}.md", table.name())), &render_markdown(table, &rows, Some(&stamp)))?;
    }
    let scored: usize = stats.iter().map(|s| s.scored).sum();
    write_json(&ctx.layout.runs_path(), &RunsFile { manifest_sha256: ctx.manifest.hash.clone(), runs, cells: stats })?;
    log::info!("evaluate: {} cells, {scored} scored clips", inputs.len());
    Ok(outcome)
}
