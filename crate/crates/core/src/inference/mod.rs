//! Prediction backends and the batch runner.
//!
//! Backend failures are data: a request that still fails after the
//! configured retries yields a result with empty `raw_text` and a recorded
//! reason, and is excluded at scoring time like any malformed reply.

mod http;
mod oracle;
mod run_dir;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::PromptBundle;

pub use http::{extract_content, HttpChatBackend};
pub use oracle::{
    load_nutrient_table, oracle_estimate, EchoTruthBackend, NutrientTable, OracleError, TableOracleBackend, TABLE_COLUMNS,
};
pub use run_dir::{
    load_run, now_timestamp, persist_run, start_run, LoadedRun, RunError, RunManifest, RunMetadata, RunStatus, EXCLUSIONS_FILE,
    FORMAT_VERSION, MANIFEST_FILE, RESULTS_FILE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    HttpChat,
    TableOracle,
    EchoTruth,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::HttpChat => "http_chat",
            BackendKind::TableOracle => "table_oracle",
            BackendKind::EchoTruth => "echo_truth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    #[serde(rename = "backend")]
    pub kind: BackendKind,
    /// Base URL of an OpenAI-style API (`.../v1`) or the full
    /// `.../chat/completions` URL. Only used by `http_chat`.
    pub endpoint_url: Option<String>,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub request_timeout_secs: u64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub parallelism: usize,
    /// Environment variable holding the bearer token, if any.
    pub api_key_env: String,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::HttpChat,
            endpoint_url: None,
            model_name: "mistral-small-24b-instruct-2501".to_owned(),
            temperature: 0.0,
            max_output_tokens: 64,
            request_timeout_secs: 120,
            max_retries: 2,
            retry_backoff_ms: 500,
            parallelism: 4,
            api_key_env: "NUTRIENT_EVAL_API_KEY".to_owned(),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), InferenceError> {
        let bad = |msg: &str| Err(InferenceError::Config(msg.to_owned()));
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be a finite number >= 0");
        }
        if self.max_output_tokens == 0 {
            return bad("max_output_tokens must be > 0");
        }
        if self.parallelism == 0 {
            return bad("parallelism must be >= 1");
        }
        if self.request_timeout_secs == 0 {
            return bad("request_timeout_secs must be > 0");
        }
        if self.kind == BackendKind::HttpChat && self.endpoint_url.as_deref().is_none_or(str::is_empty) {
            return bad("http_chat backend requires endpoint_url");
        }
        Ok(())
    }
}

/// Raw reply for one participant, stored exactly as returned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub participant_id: String,
    pub raw_text: String,
    pub backend_id: String,
    /// Wall time across all attempts. Kept in the manifest rather than in
    /// `results.jsonl` so that the results file is reproducible.
    #[serde(skip)]
    pub latency_ms: u64,
    pub attempt_count: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl InferenceResult {
    pub fn is_failure(&self) -> bool {
        self.failure.is_some()
    }
}

/// A failed completion attempt.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct BackendError {
    pub message: String,
    pub retryable: bool,
}

impl BackendError {
    pub fn retryable(message: impl Into<String>) -> Self {
        BackendError { message: message.into(), retryable: true }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        BackendError { message: message.into(), retryable: false }
    }
}

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("cannot write run log {}: {source}", path.display())]
    Log { path: std::path::PathBuf, source: std::io::Error },
}

/// Something that turns a prompt bundle into a raw reply.
pub trait Backend: Sync {
    fn id(&self) -> String;

    /// Checked once before any request is sent.
    fn check_ready(&self) -> Result<(), InferenceError> {
        Ok(())
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, BackendError>;
}

/// Append-only JSONL log of results as they complete.
pub struct RunLog {
    path: std::path::PathBuf,
    writer: Mutex<BufWriter<File>>,
}

impl RunLog {
    pub fn create(path: &Path) -> Result<RunLog, InferenceError> {
        let file = File::create(path).map_err(|source| InferenceError::Log { path: path.to_owned(), source })?;
        Ok(RunLog { path: path.to_owned(), writer: Mutex::new(BufWriter::new(file)) })
    }

    pub fn append(&self, result: &InferenceResult) -> Result<(), InferenceError> {
        let line = serde_json::to_string(result).expect("inference result serializes");
        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        w.write_all(line.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush())
            .map_err(|source| InferenceError::Log { path: self.path.clone(), source })
    }
}

fn run_one(bundle: &PromptBundle, backend: &dyn Backend, config: &BackendConfig, backend_id: &str) -> InferenceResult {
    let start = Instant::now();
    let mut attempt = 0u32;
    let outcome = loop {
        attempt += 1;
        match backend.complete(bundle) {
            Ok(text) => break Ok(text),
            Err(e) if e.retryable && attempt <= config.max_retries => {
                let backoff = config.retry_backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                thread::sleep(Duration::from_millis(backoff));
            }
            Err(e) => break Err(e),
        }
    };
    let (raw_text, failure) = match outcome {
        Ok(text) => (text, None),
        Err(e) => (String::new(), Some(e.message)),
    };
    InferenceResult {
        participant_id: bundle.participant_id.clone(),
        raw_text,
        backend_id: backend_id.to_owned(),
        latency_ms: start.elapsed().as_millis() as u64,
        attempt_count: attempt,
        failure,
    }
}

/// Sends every bundle to `backend` with up to `config.parallelism` requests
/// in flight and returns one result per bundle, ordered by participant id.
///
/// Each result is appended to `log` as soon as it completes.
pub fn run_inference(
    bundles: &[PromptBundle],
    backend: &dyn Backend,
    config: &BackendConfig,
    log: Option<&RunLog>,
) -> Result<Vec<InferenceResult>, InferenceError> {
    config.validate()?;
    backend.check_ready()?;
    let backend_id = backend.id();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(bundles.len()));
    let log_error = Mutex::new(None);
    let workers = config.parallelism.min(bundles.len()).max(1);

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(bundle) = bundles.get(i) else { break };
                let result = run_one(bundle, backend, config, &backend_id);
                if let Some(log) = log {
                    if let Err(e) = log.append(&result) {
                        log_error.lock().unwrap_or_else(|e| e.into_inner()).get_or_insert(e);
                    }
                }
                results.lock().unwrap_or_else(|e| e.into_inner()).push(result);
            });
        }
    });

    if let Some(e) = log_error.into_inner().unwrap_or_else(|e| e.into_inner()) {
        return Err(e);
    }
    let mut results = results.into_inner().unwrap_or_else(|e| e.into_inner());
    results.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    Ok(results)
}
