//! Local chat-completion endpoints with fixed behaviour, for tests and demos.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

#[derive(Clone, Debug)]
pub enum MockBehavior {
    /// Answers each known prompt with its gold answer and anything else with "UNKNOWN".
    EchoGold(HashMap<String, String>),
    /// Answers every prompt with the same text.
    Constant(String),
    /// Returns HTTP 500 for the first `failures` requests, then behaves as `then`.
    Flaky { failures: usize, then: Box<MockBehavior> },
    /// Returns 200 with a body that is not a chat response.
    Malformed,
}

impl MockBehavior {
    pub fn garbage() -> Self {
        MockBehavior::Constant("UNKNOWN".into())
    }
}

pub struct MockServer {
    server: Arc<tiny_http::Server>,
    handle: Option<JoinHandle<()>>,
    url: String,
    requests: Arc<AtomicUsize>,
}

impl MockServer {
    pub fn start(behavior: MockBehavior) -> std::io::Result<Self> {
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("mock server has no IP address"))?;
        let server = Arc::new(server);
        let requests = Arc::new(AtomicUsize::new(0));
        let handle = {
            let server = Arc::clone(&server);
            let requests = Arc::clone(&requests);
            std::thread::spawn(move || {
                for mut req in server.incoming_requests() {
                    let n = requests.fetch_add(1, Ordering::SeqCst);
                    let mut body = String::new();
                    let _ = req.as_reader().read_to_string(&mut body);
                    let (status, text) = respond(&behavior, n, &body);
                    let header = tiny_http::Header::from_bytes("Content-Type", "application/json")
                        .expect("static header is valid");
                    let resp = tiny_http::Response::from_string(text)
                        .with_status_code(status)
                        .with_header(header);
                    let _ = req.respond(resp);
                }
            })
        };
        Ok(MockServer {
            server,
            handle: Some(handle),
            url: format!("http://{addr}/v1"),
            requests,
        })
    }

    /// Base URL to put in an endpoint config.
    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn last_user_message(body: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(body).ok()?;
    v.get("messages")?
        .as_array()?
        .iter()
        .rev()
        .find(|m| m.get("role").and_then(|r| r.as_str()) == Some("user"))?
        .get("content")?
        .as_str()
        .map(String::from)
}

fn chat_body(content: &str) -> String {
    serde_json::json!({
        "object": "chat.completion",
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
    })
    .to_string()
}

fn respond(behavior: &MockBehavior, request_index: usize, body: &str) -> (u16, String) {
    match behavior {
        MockBehavior::Flaky { failures, then } => {
            if request_index < *failures {
                (500, r#"{"error":"temporarily unavailable"}"#.into())
            } else {
                respond(then, request_index - failures, body)
            }
        }
        MockBehavior::Malformed => (200, "this is not json".into()),
        MockBehavior::Constant(text) => (200, chat_body(text)),
        MockBehavior::EchoGold(gold) => {
            let Some(prompt) = last_user_message(body) else {
                return (400, r#"{"error":"no user message"}"#.into());
            };
            let answer = gold.get(&prompt).map(String::as_str).unwrap_or("UNKNOWN");
            (200, chat_body(answer))
        }
    }
}
