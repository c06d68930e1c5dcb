//! OpenAI-style chat-completions client.

use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use serde_json::{json, Value};

use super::{Backend, BackendConfig, BackendError, InferenceError};
use crate::prompt::PromptBundle;

const COMPLETIONS_PATH: &str = "/chat/completions";
const PROBE_TIMEOUT: Duration = Duration::from_secs(5);

pub struct HttpChatBackend {
    url: String,
    model_name: String,
    temperature: f64,
    max_output_tokens: u32,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpChatBackend {
    /// Builds a client from `config`; the bearer token, if any, is read from
    /// the environment variable named by `config.api_key_env`.
    pub fn new(config: &BackendConfig) -> Result<Self, InferenceError> {
        let base = config
            .endpoint_url
            .as_deref()
            .filter(|u| !u.trim().is_empty())
            .ok_or_else(|| InferenceError::Config("endpoint_url is required for the http_chat backend".into()))?;
        let base = base.trim().trim_end_matches('/');
        let url = if base.ends_with(COMPLETIONS_PATH) { base.to_owned() } else { format!("{base}{COMPLETIONS_PATH}") };
        if !(url.starts_with("http://") || url.starts_with("https://")) {
            return Err(InferenceError::Config(format!("endpoint_url must be http(s), got {url:?}")));
        }
        let api_key = if config.api_key_env.is_empty() {
            None
        } else {
            std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty())
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.request_timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpChatBackend {
            url,
            model_name: config.model_name.clone(),
            temperature: config.temperature,
            max_output_tokens: config.max_output_tokens,
            api_key,
            agent,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Request body for one bundle.
    pub fn request_body(&self, bundle: &PromptBundle) -> Value {
        json!({
            "model": self.model_name,
            "temperature": self.temperature,
            "max_tokens": self.max_output_tokens,
            "messages": [
                {"role": "system", "content": bundle.system_message},
                {"role": "user", "content": bundle.user_message},
            ],
        })
    }

    fn host_port(&self) -> Option<String> {
        let (scheme, rest) = self.url.split_once("://")?;
        let authority = rest.split('/').next()?;
        let authority = authority.rsplit_once('@').map_or(authority, |(_, a)| a);
        let has_port = authority.rsplit_once(':').is_some_and(|(_, p)| p.chars().all(|c| c.is_ascii_digit()))
            && !authority.ends_with(']');
        if has_port {
            Some(authority.to_owned())
        } else {
            Some(format!("{authority}:{}", if scheme == "https" { 443 } else { 80 }))
        }
    }
}

/// Pulls `choices[0].message.content` out of a completion response.
pub fn extract_content(body: &Value) -> Option<&str> {
    body.get("choices")?.get(0)?.get("message")?.get("content")?.as_str()
}

impl Backend for HttpChatBackend {
    fn id(&self) -> String {
        format!("http_chat:{}", self.model_name)
    }

    fn check_ready(&self) -> Result<(), InferenceError> {
        let target = self.host_port().ok_or_else(|| InferenceError::Config(format!("bad endpoint url {:?}", self.url)))?;
        let addrs: Vec<_> = target
            .to_socket_addrs()
            .map_err(|e| InferenceError::Unreachable(format!("{target}: {e}")))?
            .collect();
        let mut last = None;
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, PROBE_TIMEOUT) {
                Ok(_) => return Ok(()),
                Err(e) => last = Some(e),
            }
        }
        Err(InferenceError::Unreachable(match last {
            Some(e) => format!("{target}: {e}"),
            None => format!("{target}: no addresses"),
        }))
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, BackendError> {
        let mut request = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let body = serde_json::to_string(&self.request_body(bundle)).expect("request body serializes");
        let mut response = request.send(body.as_bytes()).map_err(|e| BackendError::retryable(format!("transport: {e}")))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::retryable(format!("reading response: {e}")))?;
        if status == 429 || status >= 500 {
            return Err(BackendError::retryable(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(BackendError::fatal(format!("HTTP {status}: {}", snippet(&text))));
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| BackendError::fatal(format!("response is not JSON ({e}): {}", snippet(&text))))?;
        extract_content(&value)
            .map(str::to_owned)
            .ok_or_else(|| BackendError::fatal(format!("response has no choices[0].message.content: {}", snippet(&text))))
    }
}

fn snippet(text: &str) -> String {
    text.chars().take(200).collect()
}
