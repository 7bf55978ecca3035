//! Hosted multimodal model access.
//!
//! Requests use the chat-completions JSON shape: a message list whose user
//! content is a list of typed parts (`text`, `image_url`, `video_url`), and
//! a `usage` object in the reply.

mod batch;
mod cache;
mod http;
pub mod mock;

use serde::{Deserialize, Serialize};

use crate::prompt::PromptBundle;

pub use batch::{run_batch, BatchEntry};
pub use cache::{cache_key, ResponseCache};
pub use http::{chat_request, HttpGateway};

/// Reported when the provider reply carries no usage numbers.
pub const MISSING_TOKENS: i64 = -1;

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("transport failed after {attempts} attempt(s): {reason}")]
    TransportError { attempts: u32, reason: String },
    #[error("model {model_id} refused the {modality} payload: {reason}")]
    UnsupportedModality { model_id: String, modality: String, reason: String },
    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed provider reply: {0}")]
    Protocol(String),
    #[error("reading visual payload: {0}")]
    Payload(String),
    #[error("response cache: {0}")]
    Cache(String),
    #[error("invalid model configuration: {0}")]
    Config(String),
}

fn default_max_output_tokens() -> u32 {
    1024
}

fn default_timeout() -> f64 {
    120.0
}

fn default_retries() -> u32 {
    2
}

fn default_retry_base_ms() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model_id: String,
    pub endpoint_url: String,
    /// Environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// First backoff delay; each retry doubles it.
    #[serde(default = "default_retry_base_ms")]
    pub retry_base_ms: u64,
}

impl ModelConfig {
    pub fn new(model_id: impl Into<String>, endpoint_url: impl Into<String>) -> Self {
        ModelConfig {
            model_id: model_id.into(),
            endpoint_url: endpoint_url.into(),
            api_key_env: None,
            max_output_tokens: default_max_output_tokens(),
            temperature: 0.0,
            timeout_s: default_timeout(),
            max_retries: default_retries(),
            retry_base_ms: default_retry_base_ms(),
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.model_id.trim().is_empty() {
            return Err(GatewayError::Config("model_id is empty".into()));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(GatewayError::Config("timeout_s must be positive".into()));
        }
        Ok(())
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> std::time::Duration {
        let factor = 1u64 << (retry.saturating_sub(1)).min(20);
        std::time::Duration::from_millis(self.retry_base_ms.saturating_mul(factor))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub raw_text: String,
    pub input_tokens: i64,
    pub output_tokens: i64,
    pub latency_ms: u64,
    pub model_id: String,
    #[serde(default)]
    pub cached: bool,
}

/// Anything that can turn a prompt bundle into a model response.
pub trait ModelClient: Sync {
    fn annotate(&self, bundle: &PromptBundle, mc: &ModelConfig) -> Result<ModelResponse, GatewayError>;
}
