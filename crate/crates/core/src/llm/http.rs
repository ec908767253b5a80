use std::thread;
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{ChatBackend, ChatMessage, LlmError, MetaPrompt, SamplingParams};

pub const ENV_API_BASE: &str = "LMPSO_API_BASE";
pub const ENV_API_KEY: &str = "LMPSO_API_KEY";
pub const ENV_MODEL: &str = "LMPSO_MODEL";

#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Either a full `.../chat/completions` URL or an API base such as
    /// `http://localhost:8000/v1`.
    pub endpoint: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Retries after the first failed attempt.
    pub max_retries: u32,
    /// Backoff before retry `k` is `initial_backoff * 2^k`.
    pub initial_backoff: Duration,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: None,
            timeout: Duration::from_secs(120),
            max_retries: 2,
            initial_backoff: Duration::from_millis(500),
        }
    }

    /// Read `LMPSO_API_BASE` and `LMPSO_API_KEY`.
    pub fn from_env() -> Result<Self, LlmError> {
        let base = std::env::var(ENV_API_BASE)
            .map_err(|_| LlmError::BackendUnavailable(format!("{ENV_API_BASE} is not set")))?;
        let mut cfg = Self::new(base);
        cfg.api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        Ok(cfg)
    }

    pub fn chat_url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Debug, Serialize)]
pub(crate) struct ChatRequest<'a> {
    pub model: &'a str,
    pub messages: &'a [ChatMessage],
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Client for any OpenAI-compatible chat-completions endpoint.
pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

enum Attempt {
    Done(String),
    Retryable(String),
    Fatal(LlmError),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::BackendUnavailable(e.to_string()))?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn attempt(&self, url: &str, body: &ChatRequest<'_>) -> Attempt {
        let mut req = self.client.post(url).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retryable(e.to_string()),
        };
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Attempt::Retryable(format!("HTTP {status}"));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Attempt::Fatal(LlmError::BackendUnavailable(format!("HTTP {status}: {text}")));
        }
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retryable(e.to_string()),
        };
        match parse_reply(&text) {
            Ok(content) => Attempt::Done(content),
            Err(e) => Attempt::Fatal(e),
        }
    }
}

fn parse_reply(body: &str) -> Result<String, LlmError> {
    let parsed: ChatResponse =
        serde_json::from_str(body).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    let choice = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| LlmError::MalformedResponse("no choices in response".into()))?;
    choice
        .message
        .content
        .ok_or_else(|| LlmError::MalformedResponse("choice has no message content".into()))
}

impl ChatBackend for HttpBackend {
    fn complete(&self, prompt: &MetaPrompt, params: &SamplingParams) -> Result<String, LlmError> {
        let url = self.config.chat_url();
        let body = ChatRequest {
            model: &params.model_name,
            messages: &prompt.messages,
            temperature: params.temperature,
            max_tokens: params.max_new_tokens,
        };
        let mut last_error = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let backoff = self.config.initial_backoff * 2u32.pow(attempt - 1);
                debug!("retrying chat completion in {backoff:?} (attempt {attempt})");
                thread::sleep(backoff);
            }
            match self.attempt(&url, &body) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retryable(e) => {
                    warn!("chat completion failed: {e}");
                    last_error = e;
                }
            }
        }
        Err(LlmError::BackendUnavailable(format!(
            "{} attempts failed, last error: {last_error}",
            self.config.max_retries + 1
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_joining() {
        assert_eq!(
            HttpConfig::new("http://h:1/v1/").chat_url(),
            "http://h:1/v1/chat/completions"
        );
        assert_eq!(
            HttpConfig::new("http://h:1/v1/chat/completions").chat_url(),
            "http://h:1/v1/chat/completions"
        );
    }

    #[test]
    fn reply_parsing() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"ROUTE: [0,1,2]"}}]}"#;
        assert_eq!(parse_reply(body).unwrap(), "ROUTE: [0,1,2]");
        assert!(matches!(parse_reply(r#"{"choices":[]}"#), Err(LlmError::MalformedResponse(_))));
        assert!(matches!(parse_reply("nope"), Err(LlmError::MalformedResponse(_))));
    }

    #[test]
    fn request_body_fields() {
        let msgs = vec![ChatMessage::system("s"), ChatMessage::user("u")];
        let body = ChatRequest { model: "m", messages: &msgs, temperature: 0.9, max_tokens: 50 };
        let v = serde_json::to_value(&body).unwrap();
        assert_eq!(v["temperature"], 0.9);
        assert_eq!(v["max_tokens"], 50);
        assert_eq!(v["messages"][0]["role"], "system");
    }
}
