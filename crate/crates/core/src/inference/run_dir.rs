//! The run directory: `manifest.json`, `results.jsonl`, `exclusions.jsonl`.
//!
//! `results.jsonl` is sorted by participant id and carries no timing data,
//! so two runs of a deterministic backend produce identical files. Wall-clock
//! values live only in the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{InferenceError, InferenceResult, RunLog};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.jsonl";
pub const EXCLUSIONS_FILE: &str = "exclusions.jsonl";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}, line {line}: {message}", path.display())]
    Json { path: PathBuf, line: usize, message: String },
    #[error("{} is not a run directory (no {MANIFEST_FILE})", .0.display())]
    NotARun(PathBuf),
    #[error("run in {} is incomplete ({found} of {expected} results); pass --allow-partial to score it anyway", path.display())]
    Partial { path: PathBuf, found: usize, expected: usize },
    #[error(transparent)]
    Log(#[from] InferenceError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_owned(), source }
}

/// What produced a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    /// The fully resolved configuration.
    pub config: serde_json::Value,
    pub seed: u64,
    pub subset_index: usize,
    pub prompt_checksum: String,
    pub prompt_fidelity: String,
    pub backend_id: String,
    pub expected_results: usize,
    pub started_at: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub status: RunStatus,
    pub metadata: RunMetadata,
    #[serde(default)]
    pub finished_at: Option<String>,
    #[serde(default)]
    pub result_count: usize,
    #[serde(default)]
    pub failure_count: usize,
    #[serde(default)]
    pub latencies_ms: BTreeMap<String, u64>,
}

#[derive(Debug, Serialize)]
struct BackendExclusion<'a> {
    participant_id: &'a str,
    stage: &'static str,
    reason: &'a str,
    attempt_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub results: Vec<InferenceResult>,
    pub partial: bool,
}

pub fn now_timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), RunError> {
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))
}

/// Creates `dir`, marks the run as in progress and opens the streaming log.
pub fn start_run(dir: &Path, metadata: &RunMetadata) -> Result<RunLog, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_manifest(
        dir,
        &RunManifest {
            format_version: FORMAT_VERSION,
            status: RunStatus::Running,
            metadata: metadata.clone(),
            finished_at: None,
            result_count: 0,
            failure_count: 0,
            latencies_ms: BTreeMap::new(),
        },
    )?;
    let exclusions = dir.join(EXCLUSIONS_FILE);
    if exclusions.exists() {
        fs::remove_file(&exclusions).map_err(io_err(&exclusions))?;
    }
    Ok(RunLog::create(&dir.join(RESULTS_FILE))?)
}

/// Writes the finished run: sorted results, backend failures and a complete
/// manifest. Replaces whatever a streaming log left behind.
pub fn persist_run(dir: &Path, results: &[InferenceResult], metadata: &RunMetadata) -> Result<RunManifest, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut sorted: Vec<&InferenceResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));

    let mut lines = String::new();
    let mut exclusions = String::new();
    for r in &sorted {
        lines.push_str(&serde_json::to_string(r).expect("result serializes"));
        lines.push('\n');
        if let Some(reason) = &r.failure {
            let row = BackendExclusion {
                participant_id: &r.participant_id,
                stage: "backend",
                reason,
                attempt_count: r.attempt_count,
            };
            exclusions.push_str(&serde_json::to_string(&row).expect("exclusion serializes"));
            exclusions.push('\n');
        }
    }
    let results_path = dir.join(RESULTS_FILE);
    fs::write(&results_path, lines).map_err(io_err(&results_path))?;
    let exclusions_path = dir.join(EXCLUSIONS_FILE);
    fs::write(&exclusions_path, exclusions).map_err(io_err(&exclusions_path))?;

    let manifest = RunManifest {
        format_version: FORMAT_VERSION,
        status: RunStatus::Complete,
        metadata: metadata.clone(),
        finished_at: Some(now_timestamp()),
        result_count: sorted.len(),
        failure_count: sorted.iter().filter(|r| r.is_failure()).count(),
        latencies_ms: sorted.iter().map(|r| (r.participant_id.clone(), r.latency_ms)).collect(),
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

/// Reads a run back. An unfinished run (status `running`, or fewer results
/// than expected) is refused unless `allow_partial` is set; a torn final
/// line in a partial log is dropped.
pub fn load_run(dir: &Path, allow_partial: bool) -> Result<LoadedRun, RunError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(RunError::NotARun(dir.to_owned()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| RunError::Json { path: manifest_path.clone(), line: e.line(), message: e.to_string() })?;

    let results_path = dir.join(RESULTS_FILE);
    let text = match fs::read_to_string(&results_path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && manifest.status == RunStatus::Running => String::new(),
        Err(e) => return Err(io_err(&results_path)(e)),
    };
    let raw_lines: Vec<(usize, &str)> =
        text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l)).collect();
    let mut results = Vec::with_capacity(raw_lines.len());
    let torn_tail_allowed = manifest.status == RunStatus::Running && !text.ends_with('\n');
    for (k, (line, raw)) in raw_lines.iter().enumerate() {
        match serde_json::from_str::<InferenceResult>(raw) {
            Ok(r) => results.push(r),
            Err(_) if torn_tail_allowed && k + 1 == raw_lines.len() => {}
            Err(e) => {
                return Err(RunError::Json { path: results_path.clone(), line: *line, message: e.to_string() })
            }
        }
    }
    results.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));

    let expected = manifest.metadata.expected_results;
    let partial = manifest.status != RunStatus::Complete || results.len() < expected;
    if partial && !allow_partial {
        return Err(RunError::Partial { path: dir.to_owned(), found: results.len(), expected });
    }
    Ok(LoadedRun { dir: dir.to_owned(), manifest, results, partial })
}
