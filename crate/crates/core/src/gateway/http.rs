use std::time::{Duration, Instant};

use base64::Engine as _;
use serde_json::{json, Value};

use super::{cache_key, GatewayError, ModelClient, ModelConfig, ModelResponse, ResponseCache, MISSING_TOKENS};
use crate::prompt::{PromptBundle, VisualPayload};

/// Builds the chat-completions request body for a bundle.
pub fn chat_request(bundle: &PromptBundle, mc: &ModelConfig) -> Result<Value, GatewayError> {
    let engine = base64::engine::general_purpose::STANDARD;
    let mut parts = vec![json!({"type": "text", "text": bundle.user_text})];
    match &bundle.visual {
        VisualPayload::Frames(frames) => {
            for f in frames {
                parts.push(json!({
                    "type": "image_url",
                    "image_url": {"url": format!("data:image/jpeg;base64,{}", engine.encode(f))}
                }));
            }
        }
        VisualPayload::Video(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| GatewayError::Payload(format!("{}: {e}", path.display())))?;
            parts.push(json!({
                "type": "video_url",
                "video_url": {"url": format!("data:video/mp4;base64,{}", engine.encode(bytes))}
            }));
        }
    }
    Ok(json!({
        "model": mc.model_id,
        "temperature": mc.temperature,
        "max_tokens": mc.max_output_tokens,
        "messages": [
            {"role": "system", "content": bundle.system_text},
            {"role": "user", "content": parts}
        ]
    }))
}

fn reply_text(body: &Value) -> Result<String, GatewayError> {
    let content = body
        .pointer("/choices/0/message/content")
        .ok_or_else(|| GatewayError::Protocol("reply has no choices[0].message.content".into()))?;
    match content {
        Value::String(s) => Ok(s.clone()),
        Value::Array(parts) => Ok(parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect::<Vec<_>>()
            .join("")),
        Value::Null => Ok(String::new()),
        other => Err(GatewayError::Protocol(format!("unexpected content type: {other}"))),
    }
}

fn usage_field(body: &Value, names: &[&str]) -> Option<i64> {
    let usage = body.get("usage")?;
    names.iter().find_map(|n| usage.get(*n).and_then(Value::as_i64))
}

fn redact(request: &Value) -> String {
    // image and video parts are large; log their sizes only
    let mut v = request.clone();
    if let Some(parts) = v.pointer_mut("/messages/1/content").and_then(Value::as_array_mut) {
        for p in parts {
            for key in ["image_url", "video_url"] {
                if let Some(url) = p.pointer_mut(&format!("/{key}/url")) {
                    let len = url.as_str().map(str::len).unwrap_or(0);
                    *url = Value::String(format!("<{len} bytes>"));
                }
            }
        }
    }
    v.to_string()
}

enum Attempt {
    Done(Value, Duration),
    Retry(String),
    Fatal(GatewayError),
}

/// HTTP client for chat-completions endpoints with an optional response cache.
pub struct HttpGateway {
    cache: Option<ResponseCache>,
    namespace: String,
}

impl HttpGateway {
    pub fn new(cache: Option<ResponseCache>) -> Self {
        HttpGateway { cache, namespace: "live".into() }
    }

    /// Separates cache entries, e.g. mock runs from billed runs.
    pub fn with_namespace(mut self, namespace: impl Into<String>) -> Self {
        self.namespace = namespace.into();
        self
    }

    fn attempt(&self, agent: &ureq::Agent, body: &Value, bundle: &PromptBundle, mc: &ModelConfig) -> Attempt {
        let mut req = agent.post(&mc.endpoint_url).set("Content-Type", "application/json");
        if let Some(var) = &mc.api_key_env {
            match std::env::var(var) {
                Ok(key) => req = req.set("Authorization", &format!("Bearer {key}")),
                Err(_) => log::warn!("{var} is not set; sending request without credentials"),
            }
        }
        let started = Instant::now();
        match req.send_json(body) {
            Ok(resp) => {
                let elapsed = started.elapsed();
                match resp.into_json::<Value>() {
                    Ok(v) => Attempt::Done(v, elapsed),
                    Err(e) => Attempt::Fatal(GatewayError::Protocol(e.to_string())),
                }
            }
            Err(ureq::Error::Status(status, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                if status == 429 || status >= 500 {
                    return Attempt::Retry(format!("HTTP {status}: {text}"));
                }
                let lower = text.to_lowercase();
                let refuses_video = matches!(bundle.visual, VisualPayload::Video(_))
                    && (status == 415 || lower.contains("video") || lower.contains("modality"));
                if refuses_video {
                    Attempt::Fatal(GatewayError::UnsupportedModality {
                        model_id: mc.model_id.clone(),
                        modality: "video".into(),
                        reason: text,
                    })
                } else {
                    Attempt::Fatal(GatewayError::Http { status, body: text })
                }
            }
            Err(ureq::Error::Transport(t)) => Attempt::Retry(t.to_string()),
        }
    }

    /// Sends one bundle, consulting the cache first.
    pub fn annotate_clip(&self, bundle: &PromptBundle, mc: &ModelConfig) -> Result<ModelResponse, GatewayError> {
        mc.validate()?;
        let key = match &self.cache {
            Some(_) => Some(cache_key(&self.namespace, mc, bundle)?),
            None => None,
        };
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(hit) = cache.get(key)? {
                log::debug!("cache hit {key} for {}", mc.model_id);
                return Ok(hit);
            }
        }

        let body = chat_request(bundle, mc)?;
        log::debug!("POST {} {}", mc.endpoint_url, redact(&body));
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(mc.timeout_s)).build();
        let mut last_reason = String::new();
        let attempts = mc.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                let delay = mc.backoff(attempt);
                log::debug!("retry {attempt} for {} in {delay:?}: {last_reason}", mc.model_id);
                std::thread::sleep(delay);
            }
            match self.attempt(&agent, &body, bundle, mc) {
                Attempt::Done(reply, elapsed) => {
                    log::debug!("reply from {}: {reply}", mc.model_id);
                    let input_tokens = usage_field(&reply, &["prompt_tokens", "input_tokens"]);
                    let output_tokens = usage_field(&reply, &["completion_tokens", "output_tokens"]);
                    if input_tokens.is_none() || output_tokens.is_none() {
                        log::warn!("{} reply has no usage numbers; recording {MISSING_TOKENS}", mc.model_id);
                    }
                    let resp = ModelResponse {
                        raw_text: reply_text(&reply)?,
                        input_tokens: input_tokens.unwrap_or(MISSING_TOKENS),
                        output_tokens: output_tokens.unwrap_or(MISSING_TOKENS),
                        latency_ms: elapsed.as_millis() as u64,
                        model_id: mc.model_id.clone(),
                        cached: false,
                    };
                    return match (&self.cache, &key) {
                        (Some(cache), Some(key)) => cache.put(key, &resp),
                        _ => Ok(resp),
                    };
                }
                Attempt::Retry(reason) => last_reason = reason,
                Attempt::Fatal(err) => return Err(err),
            }
        }
        Err(GatewayError::TransportError { attempts, reason: last_reason })
    }
}

impl ModelClient for HttpGateway {
    fn annotate(&self, bundle: &PromptBundle, mc: &ModelConfig) -> Result<ModelResponse, GatewayError> {
        self.annotate_clip(bundle, mc)
    }
}
