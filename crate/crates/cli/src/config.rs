//! The flat TOML run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use nutrient_eval::inference::{BackendConfig, BackendKind};
use nutrient_eval::prompt::Fidelity;
use nutrient_eval::recall::PartitionSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a pipeline invocation needs. On disk this is one flat TOML
/// table; relative paths are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub participants: PathBuf,
    pub recalls: PathBuf,
    pub truth: PathBuf,
    /// Per-100 g table for the `table_oracle` backend.
    pub nutrient_table: Option<PathBuf>,
    /// Alternative prompt template; the built-in fixture when absent.
    pub prompt_template: Option<PathBuf>,
    pub prompt_fidelity: Fidelity,
    pub output_dir: PathBuf,
    #[serde(flatten)]
    pub partition: PartitionSpec,
    #[serde(flatten)]
    pub backend: BackendConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            participants: PathBuf::from("participants.csv"),
            recalls: PathBuf::from("recalls.csv"),
            truth: PathBuf::from("truth.csv"),
            nutrient_table: None,
            prompt_template: None,
            prompt_fidelity: Fidelity::Verbatim,
            output_dir: PathBuf::from("out"),
            partition: PartitionSpec::default(),
            backend: BackendConfig { kind: BackendKind::HttpChat, ..BackendConfig::default() },
        }
    }
}

fn known_keys() -> Vec<String> {
    match serde_json::to_value(RunConfig::default()) {
        Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let known = known_keys();
        if let Some(key) = table.keys().find(|k| !known.contains(k)) {
            return Err(CliError::Config(format!("unknown configuration key {key:?}")));
        }
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config =
            RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.participants);
        join(&mut self.recalls);
        join(&mut self.truth);
        join(&mut self.output_dir);
        if let Some(p) = self.nutrient_table.as_mut() {
            join(p);
        }
        if let Some(p) = self.prompt_template.as_mut() {
            join(p);
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn partition_file(&self) -> PathBuf {
        self.output_dir.join("partition.json")
    }
}
