use std::path::PathBuf;

use serde::{de::DeserializeOwned, Serialize};

use crate::fsutil::{sanitize, write_atomic};

use super::SpeechError;

/// One JSON file per (clip, engine) under a root directory.
#[derive(Debug, Clone)]
pub struct TranscriptCache {
    root: PathBuf,
}

impl TranscriptCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        TranscriptCache { root: root.into() }
    }

    pub fn path(&self, clip_id: &str, engine_id: &str) -> PathBuf {
        self.root.join(sanitize(clip_id)).join(format!("{}.json", sanitize(engine_id)))
    }

    pub fn load<T: DeserializeOwned>(&self, clip_id: &str, engine_id: &str) -> Result<Option<T>, SpeechError> {
        let path = self.path(clip_id, engine_id);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| SpeechError::Cache(e.to_string()))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| SpeechError::Cache(format!("{}: {e}", path.display())))
    }

    pub fn store<T: Serialize>(&self, clip_id: &str, engine_id: &str, value: &T) -> Result<PathBuf, SpeechError> {
        let path = self.path(clip_id, engine_id);
        let json = serde_json::to_string_pretty(value).map_err(|e| SpeechError::Cache(e.to_string()))?;
        write_atomic(&path, json.as_bytes()).map_err(|e| SpeechError::Cache(e.to_string()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Transcript, TranscriptSegment};
    use super::*;

    #[test]
    fn store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TranscriptCache::new(dir.path());
        let t = Transcript {
            segments: vec![TranscriptSegment { start_s: 0.0, end_s: 1.0, text: "ciao".into() }],
            language: "it".into(),
            engine_id: "fw/medium".into(),
        };
        assert!(cache.load::<Transcript>("c1", "fw/medium").unwrap().is_none());
        let path = cache.store("c1", "fw/medium", &t).unwrap();
        assert!(path.ends_with("c1/fw_medium.json"));
        assert_eq!(cache.load::<Transcript>("c1", "fw/medium").unwrap(), Some(t));
    }
}
