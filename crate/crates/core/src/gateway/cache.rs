use std::path::{Path, PathBuf};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::{GatewayError, ModelConfig, ModelResponse};
use crate::fsutil::write_atomic;
use crate::prompt::{PromptBundle, VisualPayload};

/// Content address of a request: model, decoding settings, input
/// configuration, prompt text and visual bytes.
pub fn cache_key(namespace: &str, mc: &ModelConfig, bundle: &PromptBundle) -> Result<String, GatewayError> {
    let mut h = Sha256::new();
    let mut field = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    field(b"tvlens-response-v1");
    field(namespace.as_bytes());
    field(mc.model_id.as_bytes());
    field(&mc.temperature.to_le_bytes());
    field(&mc.max_output_tokens.to_le_bytes());
    let config = serde_json::to_vec(&bundle.config).map_err(|e| GatewayError::Cache(e.to_string()))?;
    field(&config);
    field(bundle.system_text.as_bytes());
    field(bundle.user_text.as_bytes());
    match &bundle.visual {
        VisualPayload::Frames(frames) => {
            for f in frames {
                field(f);
            }
        }
        VisualPayload::Video(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| GatewayError::Payload(format!("{}: {e}", path.display())))?;
            field(&bytes);
        }
    }
    Ok(hex::encode(h.finalize()))
}

/// Content-addressed JSON responses under a directory.
///
/// Reads are lock-free; writes go through a mutex and an atomic rename.
#[derive(Debug)]
pub struct ResponseCache {
    root: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ResponseCache { root: root.into(), write_lock: Mutex::new(()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Result<Option<ModelResponse>, GatewayError> {
        let path = self.path(key);
        match std::fs::read(&path) {
            Ok(bytes) => {
                let mut resp: ModelResponse = serde_json::from_slice(&bytes)
                    .map_err(|e| GatewayError::Cache(format!("{}: {e}", path.display())))?;
                resp.cached = true;
                Ok(Some(resp))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(GatewayError::Cache(e.to_string())),
        }
    }

    /// Stores `resp` unless an entry already exists, and returns whichever
    /// entry ends up on disk. Identical prompts raced in one batch thus all
    /// report the same response, as a later cached rerun would.
    pub fn put(&self, key: &str, resp: &ModelResponse) -> Result<ModelResponse, GatewayError> {
        let stored = ModelResponse { cached: false, ..resp.clone() };
        let json = serde_json::to_vec_pretty(&stored).map_err(|e| GatewayError::Cache(e.to_string()))?;
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(existing) = self.get(key)? {
            return Ok(ModelResponse { cached: false, ..existing });
        }
        write_atomic(&self.path(key), &json).map_err(|e| GatewayError::Cache(e.to_string()))?;
        Ok(stored)
    }
}
