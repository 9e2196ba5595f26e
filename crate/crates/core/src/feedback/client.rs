//! Chat-completion client contract and implementations.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub const DEFAULT_API_KEY_ENV: &str = "DRAFTCHECK_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected response body: {0}")]
    InvalidResponse(String),
    #[error("no replay rule matches the prompt")]
    NoReplayMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestParams {
    pub temperature: f32,
    pub max_tokens: u32,
    #[serde(with = "millis")]
    pub timeout: Duration,
}

impl Default for RequestParams {
    fn default() -> Self {
        RequestParams {
            temperature: 0.0,
            max_tokens: 1024,
            timeout: Duration::from_secs(120),
        }
    }
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// Blocking chat client. Implementations must tolerate concurrent calls
/// from the pipeline's worker threads.
pub trait ChatClient: Send + Sync {
    fn model_id(&self) -> &str;
    fn send(&self, prompt: &str, params: &RequestParams) -> Result<String, ClientError>;
}

impl<C: ChatClient + ?Sized> ChatClient for &C {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }
    fn send(&self, prompt: &str, params: &RequestParams) -> Result<String, ClientError> {
        (**self).send(prompt, params)
    }
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }
    fn send(&self, prompt: &str, params: &RequestParams) -> Result<String, ClientError> {
        (**self).send(prompt, params)
    }
}

/// OpenAI-compatible `/chat/completions` client.
pub struct HttpChatClient {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpChatClient {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        HttpChatClient {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key,
            agent,
        }
    }

    /// Reads the API key from `key_var`; a missing variable means no auth header.
    pub fn from_env(endpoint: impl Into<String>, model: impl Into<String>, key_var: &str) -> Self {
        Self::new(endpoint, model, std::env::var(key_var).ok())
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl ChatClient for HttpChatClient {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn send(&self, prompt: &str, params: &RequestParams) -> Result<String, ClientError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        });
        let mut req = self
            .agent
            .post(&self.endpoint)
            .config()
            .timeout_global(Some(params.timeout))
            .build();
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(ClientError::Status { status, body: text });
        }
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| ClientError::InvalidResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ClientError::InvalidResponse("no choices[0].message.content".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayRule {
    /// Substring that must occur in the prompt.
    pub contains: String,
    pub response: String,
}

/// Deterministic offline client: the first rule whose `contains` occurs in
/// the prompt wins, else `default`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayClient {
    #[serde(default = "ReplayClient::default_model")]
    pub model_id: String,
    pub rules: Vec<ReplayRule>,
    #[serde(default)]
    pub default: Option<String>,
}

impl ReplayClient {
    fn default_model() -> String {
        "replay".to_string()
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn from_path(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

impl ChatClient for ReplayClient {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn send(&self, prompt: &str, _params: &RequestParams) -> Result<String, ClientError> {
        self.rules
            .iter()
            .find(|r| prompt.contains(&r.contains))
            .map(|r| r.response.clone())
            .or_else(|| self.default.clone())
            .ok_or(ClientError::NoReplayMatch)
    }
}

/// Closure-backed client for tests and embedding.
pub struct FnClient<F> {
    model_id: String,
    f: F,
}

impl<F> FnClient<F>
where
    F: Fn(&str) -> Result<String, ClientError> + Send + Sync,
{
    pub fn new(model_id: impl Into<String>, f: F) -> Self {
        FnClient {
            model_id: model_id.into(),
            f,
        }
    }
}

impl<F> ChatClient for FnClient<F>
where
    F: Fn(&str) -> Result<String, ClientError> + Send + Sync,
{
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn send(&self, prompt: &str, _params: &RequestParams) -> Result<String, ClientError> {
        (self.f)(prompt)
    }
}
