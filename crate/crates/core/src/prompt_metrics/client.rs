//! Chat-completions client with retries and caching.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cache::{cache_key, CacheEntry, ResponseCache};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Endpoint root; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    /// Retries after the first attempt.
    pub retry_count: u32,
    pub max_parallel: usize,
    /// Delay before retry `k` is `backoff_ms * 2^k`.
    pub backoff_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model_name: "llama-2-13b-chat".into(),
            api_key_env: "LLM_API_KEY".into(),
            temperature: 0.0,
            max_tokens: 256,
            timeout_secs: 120,
            retry_count: 4,
            max_parallel: 8,
            backoff_ms: 500,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_parallel == 0 {
            return Err(Error::Config("max_parallel must be at least 1".into()));
        }
        if self.model_name.is_empty() || self.base_url.is_empty() {
            return Err(Error::Config("base_url and model_name are required".into()));
        }
        Ok(())
    }
}

/// Raw HTTP outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// Sends one JSON POST. `Err` means no HTTP status was received.
pub trait ChatTransport: Send + Sync {
    fn post_json(&self, url: &str, api_key: Option<&str>, body: &Value) -> std::result::Result<HttpReply, String>;
}

/// Blocking transport backed by `ureq`.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        Self {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl ChatTransport for UreqTransport {
    fn post_json(&self, url: &str, api_key: Option<&str>, body: &Value) -> std::result::Result<HttpReply, String> {
        let mut req = self.agent.post(url).set("Content-Type", "application/json");
        if let Some(key) = api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_string(&body.to_string()) {
            Ok(resp) => {
                let status = resp.status();
                let body = resp.into_string().map_err(|e| e.to_string())?;
                Ok(HttpReply { status, body })
            }
            Err(ureq::Error::Status(status, resp)) => Ok(HttpReply {
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(ureq::Error::Transport(t)) => Err(t.to_string()),
        }
    }
}

fn is_retryable(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Extracts `choices[0].message.content`.
pub fn extract_content(body: &str) -> Result<String> {
    let v: Value = serde_json::from_str(body).map_err(|e| Error::Endpoint {
        status: 200,
        body: format!("unparseable response: {e}"),
    })?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Endpoint {
            status: 200,
            body: "response has no choices[0].message.content".into(),
        })
}

pub struct LlmClient {
    cfg: LlmConfig,
    transport: Arc<dyn ChatTransport>,
    api_key: Option<String>,
    network_calls: AtomicUsize,
}

impl std::fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // the key itself is never printed
        f.debug_struct("LlmClient")
            .field("cfg", &self.cfg)
            .field("has_api_key", &self.api_key.is_some())
            .finish()
    }
}

impl LlmClient {
    /// HTTP client; the API key is read from `cfg.api_key_env` if set.
    pub fn new(cfg: LlmConfig) -> Result<Self> {
        let transport = Arc::new(UreqTransport::new(Duration::from_secs(cfg.timeout_secs)));
        Self::with_transport(cfg, transport)
    }

    pub fn with_transport(cfg: LlmConfig, transport: Arc<dyn ChatTransport>) -> Result<Self> {
        cfg.validate()?;
        let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        Ok(Self {
            cfg,
            transport,
            api_key,
            network_calls: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.cfg
    }

    /// HTTP attempts made so far, retries included.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::SeqCst)
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        json!({
            "model": self.cfg.model_name,
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
            "messages": [{"role": "user", "content": prompt}],
        })
    }

    /// One uncached completion with retries on 429, 5xx and transport failures.
    pub fn complete(&self, prompt: &str) -> Result<String> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let body = self.request_body(prompt);
        let mut last = String::new();
        for attempt in 0..=self.cfg.retry_count {
            if attempt > 0 && self.cfg.backoff_ms > 0 {
                let factor = 1u64 << (attempt - 1).min(16);
                std::thread::sleep(Duration::from_millis(self.cfg.backoff_ms.saturating_mul(factor)));
            }
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            match self.transport.post_json(&url, self.api_key.as_deref(), &body) {
                Ok(reply) if (200..300).contains(&reply.status) => return extract_content(&reply.body),
                Ok(reply) if is_retryable(reply.status) => last = format!("HTTP {}", reply.status),
                Ok(reply) => {
                    return Err(Error::Endpoint {
                        status: reply.status,
                        body: reply.body,
                    })
                }
                Err(e) => last = e,
            }
        }
        Err(Error::Transport(format!(
            "{} attempts to {url} failed; last error: {last}",
            self.cfg.retry_count + 1
        )))
    }

    /// Cached completion keyed on `(model, template_id, key_text)`. Returns
    /// the entry and whether it came from the cache. Failures leave the cache
    /// untouched.
    pub fn query_cached(
        &self,
        cache: &ResponseCache,
        template_id: &str,
        key_text: &str,
        prompt: &str,
        parse: impl Fn(&str) -> String,
    ) -> Result<(CacheEntry, bool)> {
        let key = cache_key(&self.cfg.model_name, template_id, key_text);
        if let Some(hit) = cache.get(&key) {
            return Ok((hit, true));
        }
        let response = self.complete(prompt)?;
        let entry = CacheEntry {
            key,
            model: self.cfg.model_name.clone(),
            template_id: template_id.to_string(),
            prompt_text: prompt.to_string(),
            parsed: parse(&response),
            response_text: response,
            timestamp: now_secs(),
        };
        cache.insert(entry.clone())?;
        Ok((entry, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Scripted {
        replies: Mutex<Vec<std::result::Result<HttpReply, String>>>,
    }

    impl ChatTransport for Scripted {
        fn post_json(&self, _: &str, _: Option<&str>, _: &Value) -> std::result::Result<HttpReply, String> {
            self.replies.lock().unwrap().remove(0)
        }
    }

    fn ok(content: &str) -> std::result::Result<HttpReply, String> {
        Ok(HttpReply {
            status: 200,
            body: json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string(),
        })
    }

    fn status(code: u16) -> std::result::Result<HttpReply, String> {
        Ok(HttpReply {
            status: code,
            body: "nope".into(),
        })
    }

    fn client(replies: Vec<std::result::Result<HttpReply, String>>) -> LlmClient {
        let cfg = LlmConfig {
            backoff_ms: 0,
            ..LlmConfig::default()
        };
        LlmClient::with_transport(cfg, Arc::new(Scripted { replies: Mutex::new(replies) })).unwrap()
    }

    #[test]
    fn defaults_are_deterministic_decoding() {
        let c = LlmConfig::default();
        assert_eq!(c.temperature, 0.0);
        assert_eq!(c.max_tokens, 256);
        let body = client(vec![]).request_body("hi");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["max_tokens"], 256);
        assert_eq!(body["messages"][0]["content"], "hi");
    }

    #[test]
    fn retries_then_succeeds() {
        let c = client(vec![status(500), Err("reset".into()), status(429), ok("Yes.")]);
        assert_eq!(c.complete("p").unwrap(), "Yes.");
        assert_eq!(c.network_calls(), 4);
    }

    #[test]
    fn five_server_errors_is_transport_error() {
        let c = client(vec![status(500); 5]);
        assert!(matches!(c.complete("p"), Err(Error::Transport(_))));
        assert_eq!(c.network_calls(), 5);
    }

    #[test]
    fn client_error_is_not_retried() {
        let c = client(vec![status(401), ok("Yes")]);
        assert!(matches!(c.complete("p"), Err(Error::Endpoint { status: 401, .. })));
        assert_eq!(c.network_calls(), 1);
    }

    #[test]
    fn cache_hit_skips_network_and_failure_leaves_cache_clean() {
        let cache = ResponseCache::in_memory();
        let c = client(vec![ok("Yes."), status(400)]);
        let (e, hit) = c.query_cached(&cache, "pm_01", "text", "prompt", |r| r.to_lowercase()).unwrap();
        assert!(!hit);
        assert_eq!(e.parsed, "yes.");
        let (_, hit) = c.query_cached(&cache, "pm_01", "text", "prompt", |r| r.into()).unwrap();
        assert!(hit);
        assert_eq!(c.network_calls(), 1);
        assert!(c.query_cached(&cache, "pm_02", "text", "prompt", |r| r.into()).is_err());
        assert_eq!(cache.len(), 1);
    }
}
