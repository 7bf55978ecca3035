//! `tvlens` command-line front end.
//!
//! Every command reads the same run manifest and writes below its
//! `output_dir`. Outputs carry the manifest hash so results can be traced
//! back to the configuration that produced them.

pub mod commands;
pub mod layout;
pub mod manifest;

use std::ffi::OsString;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tvlens_core::gateway::mock::{MockFixture, MockServer};
use tvlens_core::Execution;

use crate::layout::Layout;
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "tvlens", version, about = "Annotate, evaluate and analyse one-minute broadcast clips")]
pub struct Cli {
    /// Run manifest (TOML).
    #[arg(long, global = true, default_value = "tvlens.toml")]
    pub manifest: PathBuf,
    /// Serve model requests from a local fixture instead of the configured endpoints.
    #[arg(long, global = true, value_name = "FIXTURE_JSON")]
    pub mock: Option<PathBuf>,
    /// Override the manifest's parallelism.
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// Override the manifest's response cache directory.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value = "info")]
    pub log_level: log::LevelFilter,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Extract keyframes for every clip.
    Sample,
    /// Run ASR and diarization engines for every clip.
    Transcribe,
    /// Send every sweep cell to its model and store predictions.
    Annotate,
    /// Score predictions against gold labels.
    Evaluate,
    /// Audience z-scores, topic sensitivity, cohort gaps and guest statistics.
    Audience,
    /// Assemble report.md from evaluation and audience outputs.
    Report,
}

/// Everything a command needs.
pub struct Ctx {
    pub manifest: RunManifest,
    pub layout: Layout,
    /// Kept alive for the duration of the command.
    pub mock: Option<MockServer>,
    /// Response cache namespace.
    pub namespace: &'static str,
}

impl Ctx {
    pub fn exec(&self) -> Execution {
        Execution::with_limit(self.manifest.parallelism)
    }
}

/// Per-item failures collected while a command keeps going.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn fail(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::error!("{message}");
        self.failures.push(message);
    }

    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Single-instance guard for an output directory.
struct Lock(PathBuf);

impl Lock {
    fn acquire(path: &Path) -> Result<Lock> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        match OpenOptions::new().write(true).create_new(true).open(path) {
            Ok(_) => Ok(Lock(path.to_path_buf())),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => anyhow::bail!(
                "{} exists: another tvlens run is using this output directory (delete the file if that run is gone)",
                path.display()
            ),
            Err(e) => Err(e).with_context(|| format!("creating {}", path.display())),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn build_ctx(cli: &Cli) -> Result<Ctx> {
    let mut manifest = RunManifest::load(&cli.manifest)?;
    if let Some(p) = cli.parallelism {
        manifest.parallelism = p.max(1);
    }
    if let Some(c) = &cli.cache_dir {
        manifest.cache_dir = c.clone();
    }
    let mut namespace = "live";
    let mock = match &cli.mock {
        Some(path) => {
            let fixture = MockFixture::load(path).with_context(|| format!("loading mock fixture {}", path.display()))?;
            let server = MockServer::start(fixture).context("starting mock server")?;
            log::info!("mock gateway listening at {}", server.url());
            for cell in &mut manifest.cells {
                cell.model.endpoint_url = server.url();
                cell.model.api_key_env = None;
            }
            namespace = "mock";
            Some(server)
        }
        None => None,
    };
    let layout = Layout::new(&manifest.output_dir);
    Ok(Ctx { manifest, layout, mock, namespace })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let ctx = build_ctx(cli)?;
    let _lock = Lock::acquire(&ctx.layout.lock_path())?;
    match cli.command {
        Command::Sample => commands::sample::run(&ctx),
        Command::Transcribe => commands::transcribe::run(&ctx),
        Command::Annotate => commands::annotate::run(&ctx),
        Command::Evaluate => commands::evaluate::run(&ctx),
        Command::Audience => commands::audience::run(&ctx),
        Command::Report => commands::report::run(&ctx),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = env_logger::Builder::new().filter_level(cli.log_level).format_timestamp(None).try_init();
    match execute(&cli) {
        Ok(outcome) if outcome.is_ok() => 0,
        Ok(outcome) => {
            eprintln!("{} failure(s):", outcome.failures.len());
            for f in &outcome.failures {
                eprintln!("  {f}");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
