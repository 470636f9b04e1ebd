//! Chat-completion client with retries and an on-disk response cache.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QueryError {
    #[error("request timed out")]
    Timeout,
    #[error("endpoint returned HTTP {0}")]
    HttpError(u16),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("response cache: {0}")]
    Cache(String),
}

impl QueryError {
    fn retryable(&self) -> bool {
        match self {
            QueryError::Timeout | QueryError::Transport(_) => true,
            QueryError::HttpError(status) => *status >= 500,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelEndpointConfig {
    /// Chat-completions URL; `/chat/completions` is appended unless present.
    pub base_url: String,
    pub model_name: String,
    /// Environment variable holding a bearer token; no header when unset.
    pub api_key_env: Option<String>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// First retry delay; doubled on each further retry.
    pub backoff_ms: u64,
    pub parallelism: usize,
}

impl Default for ModelEndpointConfig {
    fn default() -> Self {
        ModelEndpointConfig {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model_name: "model".into(),
            api_key_env: None,
            temperature: 0.0,
            max_tokens: 512,
            timeout_secs: 60.0,
            max_retries: 3,
            backoff_ms: 200,
            parallelism: 4,
        }
    }
}

impl ModelEndpointConfig {
    pub fn endpoint_url(&self) -> String {
        let trimmed = self.base_url.trim_end_matches('/');
        if trimmed.ends_with("/chat/completions") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/chat/completions")
        }
    }
}

/// Content-addressed key of one request.
pub fn cache_key(model: &str, prompt: &str, temperature: f64, max_tokens: u32) -> String {
    let material = serde_json::json!([model, prompt, temperature, max_tokens]).to_string();
    hex::encode(Sha256::digest(material.as_bytes()))
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    model: String,
    response: String,
}

/// One JSON file per response under a directory.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, QueryError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| QueryError::Cache(e.to_string()))?;
        Ok(ResponseCache {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.key == key).then_some(entry.response)
    }

    pub fn put(&self, key: &str, model: &str, response: &str) -> Result<(), QueryError> {
        let entry = CacheEntry {
            key: key.to_string(),
            model: model.to_string(),
            response: response.to_string(),
        };
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let tmp = self.dir.join(format!("{key}.tmp"));
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string(&entry).expect("entry serialises").as_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, self.path(key))
        };
        write().map_err(|e| QueryError::Cache(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientStats {
    pub cache_hits: u64,
    pub network_calls: u64,
    pub retries: u64,
}

/// Answer text plus the number of HTTP attempts it took (0 for cache hits).
#[derive(Clone, Debug, PartialEq)]
pub struct QueryOutcome {
    pub content: String,
    pub attempts: u32,
}

pub struct ModelClient {
    cfg: ModelEndpointConfig,
    agent: ureq::Agent,
    cache: Option<ResponseCache>,
    api_key: Option<String>,
    cache_hits: AtomicU64,
    network_calls: AtomicU64,
    retries: AtomicU64,
}

impl ModelClient {
    pub fn new(cfg: ModelEndpointConfig, cache: Option<ResponseCache>) -> Result<Self, QueryError> {
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| QueryError::MissingApiKey(var.clone()))?),
            None => None,
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_secs.max(0.001))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(ModelClient {
            cfg,
            agent,
            cache,
            api_key,
            cache_hits: AtomicU64::new(0),
            network_calls: AtomicU64::new(0),
            retries: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &ModelEndpointConfig {
        &self.cfg
    }

    pub fn stats(&self) -> ClientStats {
        ClientStats {
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
            network_calls: self.network_calls.load(Ordering::Relaxed),
            retries: self.retries.load(Ordering::Relaxed),
        }
    }

    /// First-choice message content for a single-turn user prompt.
    pub fn query(&self, prompt: &str) -> Result<QueryOutcome, QueryError> {
        let key = cache_key(&self.cfg.model_name, prompt, self.cfg.temperature, self.cfg.max_tokens);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(QueryOutcome {
                content: hit,
                attempts: 0,
            });
        }
        let body = serde_json::json!({
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        })
        .to_string();

        let mut attempt = 0u32;
        loop {
            attempt += 1;
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            match self.send_once(&body) {
                Ok(content) => {
                    if let Some(cache) = &self.cache {
                        cache.put(&key, &self.cfg.model_name, &content)?;
                    }
                    return Ok(QueryOutcome {
                        content,
                        attempts: attempt,
                    });
                }
                Err(e) if e.retryable() && attempt <= self.cfg.max_retries => {
                    self.retries.fetch_add(1, Ordering::Relaxed);
                    let delay = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                    std::thread::sleep(Duration::from_millis(delay));
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn send_once(&self, body: &str) -> Result<String, QueryError> {
        let mut req = self
            .agent
            .post(&self.cfg.endpoint_url())
            .content_type("application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let resp = req.send(body).map_err(map_transport)?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(QueryError::HttpError(status));
        }
        let text = resp.into_body().read_to_string().map_err(map_transport)?;
        parse_chat_response(&text)
    }
}

fn map_transport(e: ureq::Error) -> QueryError {
    match e {
        ureq::Error::Timeout(_) => QueryError::Timeout,
        ureq::Error::StatusCode(s) => QueryError::HttpError(s),
        other => QueryError::Transport(other.to_string()),
    }
}

/// Extracts `choices[0].message.content`.
pub fn parse_chat_response(text: &str) -> Result<String, QueryError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| QueryError::MalformedResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(String::from)
        .ok_or_else(|| QueryError::MalformedResponse("missing choices[0].message.content".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_key_is_stable_and_sensitive() {
        let k = cache_key("m", "hello", 0.0, 16);
        assert_eq!(k.len(), 64);
        assert_eq!(k, cache_key("m", "hello", 0.0, 16));
        assert_ne!(k, cache_key("m", "hello", 0.5, 16));
        assert_ne!(k, cache_key("m", "hello", 0.0, 17));
        assert_ne!(k, cache_key("n", "hello", 0.0, 16));
    }

    #[test]
    fn cache_key_matches_independent_digest() {
        // sha256 of the JSON array ["m","hello",0.0,16]
        let expected = hex::encode(Sha256::digest(br#"["m","hello",0.0,16]"#));
        assert_eq!(cache_key("m", "hello", 0.0, 16), expected);
    }

    #[test]
    fn endpoint_url_suffix() {
        let mut cfg = ModelEndpointConfig {
            base_url: "http://h/v1/".into(),
            ..Default::default()
        };
        assert_eq!(cfg.endpoint_url(), "http://h/v1/chat/completions");
        cfg.base_url = "http://h/v1/chat/completions".into();
        assert_eq!(cfg.endpoint_url(), "http://h/v1/chat/completions");
    }

    #[test]
    fn response_parsing() {
        assert_eq!(
            parse_chat_response(r#"{"choices":[{"message":{"role":"assistant","content":"CCO"}}]}"#).unwrap(),
            "CCO"
        );
        assert!(matches!(parse_chat_response("nope"), Err(QueryError::MalformedResponse(_))));
        assert!(matches!(parse_chat_response(r#"{"choices":[]}"#), Err(QueryError::MalformedResponse(_))));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        assert_eq!(cache.get("abc"), None);
        cache.put("abc", "m", "answer").unwrap();
        assert_eq!(cache.get("abc").as_deref(), Some("answer"));
    }
}
