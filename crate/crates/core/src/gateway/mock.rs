//! Local chat-completions server driven by a JSON fixture.
//!
//! Used by the CLI's `--mock` mode and by tests, so the whole pipeline runs
//! offline over real HTTP.
//!
//! Fixture shape:
//!
//! ```json
//! {
//!   "rules": [
//!     {"model": "gemini-3-pro", "contains": "Piazza Aperta",
//!      "content": "{\"topic\": \"Music\", ...}",
//!      "usage": {"prompt_tokens": 6224, "completion_tokens": 80}}
//!   ],
//!   "default": {"content": "{}"}
//! }
//! ```
//!
//! The first rule whose `model` equals the request model and whose
//! `contains` occurs in the request body wins; `default` answers the rest.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockUsage {
    pub prompt_tokens: i64,
    pub completion_tokens: i64,
}

fn ok_status() -> u16 {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains: Option<String>,
    #[serde(default = "ok_status")]
    pub status: u16,
    #[serde(default)]
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<MockUsage>,
    /// Sleep before answering, to exercise timeouts.
    #[serde(default)]
    pub delay_ms: u64,
}

impl MockRule {
    pub fn reply(content: impl Into<String>, usage: Option<MockUsage>) -> Self {
        MockRule {
            model: None,
            contains: None,
            status: 200,
            content: content.into(),
            usage,
            delay_ms: 0,
        }
    }

    pub fn status(status: u16, body: impl Into<String>) -> Self {
        MockRule { status, ..MockRule::reply(body, None) }
    }

    fn matches(&self, model: &str, body: &str) -> bool {
        self.model.as_deref().is_none_or(|m| m == model)
            && self.contains.as_deref().is_none_or(|c| body.contains(c))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockFixture {
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<MockRule>,
}

impl MockFixture {
    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[derive(Default)]
struct State {
    fixture: MockFixture,
    script: Mutex<VecDeque<MockRule>>,
    requests: Mutex<Vec<Value>>,
    in_flight: AtomicUsize,
    peak_in_flight: AtomicUsize,
    shutdown: AtomicBool,
}

pub struct MockServer {
    addr: SocketAddr,
    state: Arc<State>,
    accept: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(fixture: MockFixture) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let state = Arc::new(State { fixture, ..State::default() });
        let accept_state = Arc::clone(&state);
        let accept = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if accept_state.shutdown.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let st = Arc::clone(&accept_state);
                std::thread::spawn(move || {
                    if let Err(e) = handle(stream, &st) {
                        log::debug!("mock connection error: {e}");
                    }
                });
            }
        });
        Ok(MockServer { addr, state, accept: Some(accept) })
    }

    /// Chat-completions URL served by this instance.
    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    /// Queues one-shot responses served before the fixture rules.
    pub fn script(&self, rules: impl IntoIterator<Item = MockRule>) {
        self.state.script.lock().unwrap().extend(rules);
    }

    pub fn request_count(&self) -> usize {
        self.state.requests.lock().unwrap().len()
    }

    pub fn requests(&self) -> Vec<Value> {
        self.state.requests.lock().unwrap().clone()
    }

    /// Highest number of requests observed in flight at once.
    pub fn peak_in_flight(&self) -> usize {
        self.state.peak_in_flight.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.state.shutdown.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

fn read_request(stream: &TcpStream) -> std::io::Result<Vec<u8>> {
    let mut reader = BufReader::new(stream);
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; content_length];
    reader.read_exact(&mut body)?;
    Ok(body)
}

fn handle(mut stream: TcpStream, state: &State) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(30)))?;
    let body = read_request(&stream)?;
    if state.shutdown.load(Ordering::SeqCst) {
        return Ok(());
    }
    let now = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    state.peak_in_flight.fetch_max(now, Ordering::SeqCst);

    let text = String::from_utf8_lossy(&body).into_owned();
    let request: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
    let model = request.get("model").and_then(Value::as_str).unwrap_or_default().to_string();
    state.requests.lock().unwrap().push(request);

    let scripted = state.script.lock().unwrap().pop_front();
    let rule = scripted.or_else(|| {
        state
            .fixture
            .rules
            .iter()
            .find(|r| r.matches(&model, &text))
            .or(state.fixture.default.as_ref())
            .cloned()
    });
    let rule = rule.unwrap_or_else(|| MockRule::status(404, "no mock rule matched"));
    if rule.delay_ms > 0 {
        std::thread::sleep(Duration::from_millis(rule.delay_ms));
    }

    let payload = if rule.status == 200 {
        let mut reply = json!({
            "id": "mock",
            "object": "chat.completion",
            "model": model,
            "choices": [{"index": 0, "message": {"role": "assistant", "content": rule.content}}]
        });
        if let Some(u) = rule.usage {
            reply["usage"] = json!({"prompt_tokens": u.prompt_tokens, "completion_tokens": u.completion_tokens});
        }
        reply.to_string()
    } else {
        json!({"error": {"message": rule.content}}).to_string()
    };
    let head = format!(
        "HTTP/1.1 {} MOCK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        rule.status,
        payload.len()
    );
    state.in_flight.fetch_sub(1, Ordering::SeqCst);
    // the client may have timed out and gone away
    let _ = stream.write_all(head.as_bytes()).and_then(|_| stream.write_all(payload.as_bytes()));
    Ok(())
}
