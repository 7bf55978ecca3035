//! Where each command writes under the output directory.

use std::path::{Path, PathBuf};

use tvlens_core::fsutil::sanitize;
use tvlens_core::prompt::InputConfiguration;

#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn frames_dir(&self, clip_id: &str) -> PathBuf {
        self.root.join("frames").join(sanitize(clip_id))
    }

    pub fn frame_path(&self, clip_id: &str, index: usize) -> PathBuf {
        self.frames_dir(clip_id).join(format!("frame_{index:02}.jpg"))
    }

    pub fn plan_path(&self, clip_id: &str) -> PathBuf {
        self.frames_dir(clip_id).join("plan.json")
    }

    pub fn transcripts_dir(&self) -> PathBuf {
        self.root.join("transcripts")
    }

    fn cell_stem(model_id: &str, config: &InputConfiguration) -> String {
        format!("{}__{}__{}", sanitize(model_id), config.visual_mode, config.name())
    }

    pub fn predictions_path(&self, model_id: &str, config: &InputConfiguration) -> PathBuf {
        self.root.join("predictions").join(format!("{}.jsonl", Self::cell_stem(model_id, config)))
    }

    pub fn audit_path(&self, model_id: &str, config: &InputConfiguration) -> PathBuf {
        self.root.join("audit").join(format!("{}.jsonl", Self::cell_stem(model_id, config)))
    }

    pub fn results_dir(&self) -> PathBuf {
        self.root.join("results")
    }

    pub fn runs_path(&self) -> PathBuf {
        self.results_dir().join("runs.json")
    }

    pub fn audience_dir(&self) -> PathBuf {
        self.root.join("audience")
    }

    pub fn report_path(&self) -> PathBuf {
        self.root.join("report.md")
    }

    pub fn lock_path(&self) -> PathBuf {
        self.root.join(".lock")
    }
}
