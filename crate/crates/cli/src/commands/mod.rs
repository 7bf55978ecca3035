pub mod annotate;
pub mod audience;
pub mod evaluate;
pub mod report;
pub mod sample;
pub mod transcribe;

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use tvlens_core::dataset::load_dataset;
use tvlens_core::fsutil::write_atomic;
use tvlens_core::ClipRecord;

use crate::Ctx;

pub(crate) fn clips(ctx: &Ctx) -> Result<Vec<ClipRecord>> {
    Ok(load_dataset(&ctx.manifest.dataset)?)
}

pub(crate) fn write_text_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    write_text_bytes(path, text.as_bytes())
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// JSON Lines body, one serialized value per line.
pub(crate) fn jsonl<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}
