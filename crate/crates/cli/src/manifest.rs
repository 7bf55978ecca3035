//! Run manifests: one TOML file describing a whole sweep.
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use tvlens_core::frames::{FrameDecoder, FramingStrategy};
use tvlens_core::gateway::ModelConfig;
use tvlens_core::prompt::{InputConfiguration, VisualMode};
use tvlens_core::speech::EngineConfig;
use tvlens_core::TaxonomySet;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyPaths {
    pub topic: PathBuf,
    pub environment: PathBuf,
    pub sensitive: PathBuf,
}

/// A model and the input configurations to run it under, written as
/// `"<visual>:<config>"`, e.g. `"frames:asr_meta"`.
#[derive(Debug, Clone, Deserialize)]
pub struct ManifestModel {
    #[serde(flatten)]
    pub config: ModelConfig,
    pub configs: Vec<String>,
}

fn default_min_support() -> usize {
    tvlens_core::audience::DEFAULT_MIN_SUPPORT
}

fn default_top_k() -> usize {
    tvlens_core::audience::DEFAULT_GAP_TOP_K
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AudienceInputs {
    pub minutes: PathBuf,
    pub annotations: PathBuf,
    #[serde(default)]
    pub registry: Option<PathBuf>,
    #[serde(default = "default_min_support")]
    pub min_support: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

fn default_parallelism() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    dataset: PathBuf,
    output_dir: PathBuf,
    #[serde(default)]
    cache_dir: Option<PathBuf>,
    #[serde(default = "default_parallelism")]
    parallelism: usize,
    /// Recorded for provenance; nothing in the pipeline is random.
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    taxonomy: Option<TaxonomyPaths>,
    #[serde(default)]
    framing: FramingStrategy,
    #[serde(default)]
    decoder: Option<FrameDecoder>,
    #[serde(default)]
    asr: Option<EngineConfig>,
    #[serde(default)]
    diarization: Option<EngineConfig>,
    #[serde(default)]
    models: Vec<ManifestModel>,
    #[serde(default)]
    audience: Option<AudienceInputs>,
}

/// One (model, input configuration) cell of the sweep.
#[derive(Debug, Clone)]
pub struct Cell {
    pub model: ModelConfig,
    pub config: InputConfiguration,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{} {}:{}", self.model.model_id, self.config.visual_mode, self.config.name())
    }
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub path: PathBuf,
    /// Hex sha256 of the manifest file bytes.
    pub hash: String,
    pub dataset: PathBuf,
    pub output_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub parallelism: usize,
    pub seed: u64,
    pub taxonomy: Option<TaxonomyPaths>,
    pub framing: FramingStrategy,
    pub decoder: FrameDecoder,
    pub asr: Option<EngineConfig>,
    pub diarization: Option<EngineConfig>,
    pub cells: Vec<Cell>,
    pub audience: Option<AudienceInputs>,
}

pub fn parse_cell_config(raw: &str) -> Result<InputConfiguration> {
    let (mode, name) = raw
        .split_once(':')
        .with_context(|| format!("input configuration {raw:?} must look like \"frames:asr_meta\""))?;
    let mode: VisualMode = mode.trim().parse()?;
    Ok(InputConfiguration::preset(mode, name.trim())?)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn must_exist(p: &Path, what: &str) -> Result<()> {
    if !p.exists() {
        bail!("{what} not found: {}", p.display());
    }
    Ok(())
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest> {
        let bytes = std::fs::read(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let text = std::str::from_utf8(&bytes).context("manifest is not UTF-8")?;
        let raw: RawManifest = toml::from_str(text).with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let output_dir = resolve(&base, &raw.output_dir);

        let mut cells = Vec::new();
        let mut seen = HashSet::new();
        for m in &raw.models {
            m.config.validate()?;
            if m.configs.is_empty() {
                bail!("model {} lists no input configurations", m.config.model_id);
            }
            for c in &m.configs {
                let config = parse_cell_config(c).with_context(|| format!("model {}", m.config.model_id))?;
                if !seen.insert((m.config.model_id.clone(), config)) {
                    bail!("duplicate sweep cell {} {c}", m.config.model_id);
                }
                cells.push(Cell { model: m.config.clone(), config });
            }
        }
        raw.framing.validate()?;

        let manifest = RunManifest {
            path: path.to_path_buf(),
            hash: hex::encode(Sha256::digest(&bytes)),
            dataset: resolve(&base, &raw.dataset),
            cache_dir: raw.cache_dir.map(|c| resolve(&base, &c)).unwrap_or_else(|| output_dir.join("cache")),
            output_dir,
            parallelism: raw.parallelism.max(1),
            seed: raw.seed,
            taxonomy: raw.taxonomy.map(|t| TaxonomyPaths {
                topic: resolve(&base, &t.topic),
                environment: resolve(&base, &t.environment),
                sensitive: resolve(&base, &t.sensitive),
            }),
            framing: raw.framing,
            decoder: raw.decoder.unwrap_or_default(),
            asr: raw.asr,
            diarization: raw.diarization,
            cells,
            audience: raw.audience.map(|a| AudienceInputs {
                minutes: resolve(&base, &a.minutes),
                annotations: resolve(&base, &a.annotations),
                registry: a.registry.map(|r| resolve(&base, &r)),
                ..a
            }),
        };
        manifest.check_paths()?;
        Ok(manifest)
    }

    fn check_paths(&self) -> Result<()> {
        must_exist(&self.dataset, "dataset")?;
        if let Some(t) = &self.taxonomy {
            must_exist(&t.topic, "topic taxonomy")?;
            must_exist(&t.environment, "environment taxonomy")?;
            must_exist(&t.sensitive, "sensitive taxonomy")?;
        }
        if let Some(a) = &self.audience {
            must_exist(&a.minutes, "audience minutes")?;
            must_exist(&a.annotations, "minute annotations")?;
            if let Some(r) = &a.registry {
                must_exist(r, "guest registry")?;
            }
        }
        Ok(())
    }

    pub fn taxonomies(&self) -> Result<TaxonomySet> {
        Ok(match &self.taxonomy {
            Some(t) => TaxonomySet::load(&t.topic, &t.environment, &t.sensitive)?,
            None => TaxonomySet::builtin(),
        })
    }

    /// Header line embedded in every derived text output.
    pub fn stamp(&self) -> String {
        format!("manifest_sha256={}", self.hash)
    }

    pub fn uses_frames(&self) -> bool {
        self.cells.iter().any(|c| c.config.visual_mode == VisualMode::Frames)
    }

    pub fn uses_asr(&self) -> bool {
        self.cells.iter().any(|c| c.config.with_asr)
    }

    pub fn uses_diarization(&self) -> bool {
        self.cells.iter().any(|c| c.config.with_diarization)
    }
}
