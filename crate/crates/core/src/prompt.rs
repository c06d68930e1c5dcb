//! The ten-shot prompt fixture, per-participant prompt rendering, and the
//! fine-tuning dataset export.
//!
//! The shipped fixture is a text file with three sections introduced by the
//! header lines `[SYSTEM]`, `[EXAMPLES]` and `[USER]`. The system section
//! holds one `{examples}` placeholder which is replaced by the examples
//! section; the user section holds one `{diet}` placeholder which is replaced
//! by the participant's food string.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::evaluation::{parse_prediction, ParseMode, PredictionOutcome};
use crate::recall::{Cohort, FoodStringError, EVALUATED_DAY};
use crate::{format_decimal, NutrientVector};

/// The ten-shot chain-of-thought prompt as published, transcribed verbatim.
pub const PROMPT_FIXTURE: &str = include_str!("../fixtures/ten_shot_prompt.txt");

/// SHA-256 of [`PROMPT_FIXTURE`]; defines what "verbatim" means.
pub const PROMPT_FIXTURE_SHA256: &str = "3b3201f7f34d9192fc6502e704a562f443e575c26735781a8636ba3d2e23c6b7";

pub const EXAMPLES_PLACEHOLDER: &str = "{examples}";
pub const DIET_PLACEHOLDER: &str = "{diet}";

const RECALL_PREFIX: &str = "24-hour dietary recall: ";
const SECTION_HEADERS: [&str; 3] = ["[SYSTEM]", "[EXAMPLES]", "[USER]"];

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("cannot read prompt template {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("prompt template is missing the {0} section")]
    MissingSection(&'static str),
    #[error("prompt template section {section} must contain {placeholder} exactly once (found {count})")]
    Placeholder { section: &'static str, placeholder: &'static str, count: usize },
    #[error("calibration example {index}: {reason}")]
    MalformedExample { index: usize, reason: String },
    #[error("food string is empty")]
    EmptyFoodString,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("fine-tuning subset is empty")]
    EmptySubset,
    #[error("participant {0:?} has no ground truth")]
    MissingTruth(String),
    #[error("participant {0:?} has no day-2 recall")]
    MissingRecall(String),
    #[error("participant {participant_id:?}: {source}")]
    FoodString { participant_id: String, source: FoodStringError },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// Byte-for-byte as published, typographical slips included.
    #[default]
    Verbatim,
    /// HTML-artifact tags stripped and example labels normalized to
    /// `Expected Output:`.
    Cleaned,
}

/// One calibration pair from the examples section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub input_string: String,
    pub expected: NutrientVector,
    /// Label in front of the expected values as it appears in the source.
    pub label: String,
    /// Expected values exactly as written in the source.
    pub expected_text: String,
}

impl FewShotExample {
    fn cleaned_block(&self) -> String {
        format!("Patient Input:\n\n{RECALL_PREFIX}{}\n\nExpected Output: {}", self.input_string, self.expected_text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    system_text: String,
    examples_region: String,
    examples: Vec<FewShotExample>,
    user_text: String,
    fidelity: Fidelity,
    checksum: String,
}

impl PromptTemplate {
    /// The shipped ten-shot fixture.
    pub fn fixture(fidelity: Fidelity) -> PromptTemplate {
        PromptTemplate::parse(PROMPT_FIXTURE, fidelity).expect("shipped prompt fixture is well formed")
    }

    pub fn load(path: &Path, fidelity: Fidelity) -> Result<PromptTemplate, PromptError> {
        let text = fs::read_to_string(path).map_err(|source| PromptError::Io { path: path.to_owned(), source })?;
        PromptTemplate::parse(&text, fidelity)
    }

    pub fn parse(text: &str, fidelity: Fidelity) -> Result<PromptTemplate, PromptError> {
        let sections = split_sections(text);
        let get = |i: usize| sections[i].clone().ok_or(PromptError::MissingSection(SECTION_HEADERS[i]));
        let system_text = get(0)?;
        let examples_region = get(1)?;
        let user_text = get(2)?;
        check_placeholder(&system_text, "[SYSTEM]", EXAMPLES_PLACEHOLDER)?;
        check_placeholder(&user_text, "[USER]", DIET_PLACEHOLDER)?;
        let examples = parse_examples(&examples_region)?;
        Ok(PromptTemplate {
            system_text,
            examples_region,
            examples,
            user_text,
            fidelity,
            checksum: sha256_hex(text.as_bytes()),
        })
    }

    pub fn examples(&self) -> &[FewShotExample] {
        &self.examples
    }

    pub fn fidelity(&self) -> Fidelity {
        self.fidelity
    }

    /// SHA-256 of the template source text.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn user_text(&self) -> &str {
        &self.user_text
    }

    /// The full system message with every calibration example in place.
    pub fn system_message(&self) -> String {
        match self.fidelity {
            Fidelity::Verbatim => self.system_text.replacen(EXAMPLES_PLACEHOLDER, &self.examples_region, 1),
            Fidelity::Cleaned => {
                let blocks: Vec<String> = self.examples.iter().map(FewShotExample::cleaned_block).collect();
                strip_html_tags(&self.system_text).replacen(EXAMPLES_PLACEHOLDER, &blocks.join("\n\n"), 1)
            }
        }
    }

    pub fn user_message(&self, food_string: &str) -> String {
        let user = match self.fidelity {
            Fidelity::Verbatim => self.user_text.clone(),
            Fidelity::Cleaned => strip_html_tags(&self.user_text),
        };
        user.replacen(DIET_PLACEHOLDER, food_string, 1)
    }
}

fn split_sections(text: &str) -> [Option<String>; 3] {
    let mut sections: [Option<Vec<&str>>; 3] = [None, None, None];
    let mut current: Option<usize> = None;
    for line in text.split('\n') {
        if let Some(i) = SECTION_HEADERS.iter().position(|h| line.trim_end_matches('\r') == *h) {
            sections[i] = Some(Vec::new());
            current = Some(i);
        } else if let Some(i) = current {
            if let Some(lines) = sections[i].as_mut() {
                lines.push(line);
            }
        }
    }
    sections.map(|s| s.map(|lines| lines.join("\n").trim_end_matches(['\n', '\r']).to_owned()))
}

fn check_placeholder(text: &str, section: &'static str, placeholder: &'static str) -> Result<(), PromptError> {
    let count = text.matches(placeholder).count();
    if count != 1 {
        return Err(PromptError::Placeholder { section, placeholder, count });
    }
    Ok(())
}

fn parse_examples(region: &str) -> Result<Vec<FewShotExample>, PromptError> {
    let mut blocks: Vec<Vec<&str>> = Vec::new();
    for line in region.lines() {
        if line.trim() == "Patient Input:" {
            blocks.push(Vec::new());
        } else if let Some(block) = blocks.last_mut() {
            block.push(line);
        } else if !line.trim().is_empty() {
            return Err(PromptError::MalformedExample { index: 1, reason: "text before the first example".into() });
        }
    }
    if blocks.is_empty() {
        return Err(PromptError::MalformedExample { index: 1, reason: "no examples".into() });
    }
    blocks
        .iter()
        .enumerate()
        .map(|(i, lines)| {
            let index = i + 1;
            let malformed = |reason: &str| PromptError::MalformedExample { index, reason: reason.into() };
            let input_string = lines
                .iter()
                .find_map(|l| l.strip_prefix(RECALL_PREFIX))
                .ok_or_else(|| malformed("no dietary recall line"))?
                .to_owned();
            let output_line = lines
                .iter()
                .rev()
                .find(|l| !l.trim().is_empty())
                .ok_or_else(|| malformed("no expected output"))?;
            let (label, values) = output_line.rsplit_once(": ").ok_or_else(|| malformed("no output label"))?;
            let expected = match parse_prediction(values, ParseMode::Strict) {
                PredictionOutcome::Valid(v) => v,
                PredictionOutcome::Invalid(reason) => {
                    return Err(malformed(&format!("expected output {values:?} is invalid ({reason})")))
                }
            };
            Ok(FewShotExample {
                input_string,
                expected,
                label: label.to_owned(),
                expected_text: values.to_owned(),
            })
        })
        .collect()
}

fn strip_html_tags(text: &str) -> String {
    static TAGS: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    TAGS.get_or_init(|| Regex::new(r"</?(?:p|ol|ul|li)\b[^>]*>").expect("valid tag pattern"))
        .replace_all(text, "")
        .into_owned()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A rendered system and user message for one participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub participant_id: String,
    pub system_message: String,
    pub user_message: String,
}

pub fn render_prompt(
    template: &PromptTemplate,
    participant_id: &str,
    food_string: &str,
) -> Result<PromptBundle, PromptError> {
    if food_string.trim().is_empty() {
        return Err(PromptError::EmptyFoodString);
    }
    Ok(PromptBundle {
        participant_id: participant_id.to_owned(),
        system_message: template.system_message(),
        user_message: template.user_message(food_string),
    })
}

/// The six values joined by `"; "` in fixed nutrient order, each in minimal
/// decimal form with at most two decimals.
pub fn format_target(values: &NutrientVector) -> String {
    values.into_array().map(format_decimal).join("; ")
}

/// One line of the fine-tuning JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub system: String,
    pub user: String,
    pub assistant: String,
}

/// Writes one chat-style training example per subset member, ordered by
/// participant id, and returns the number of lines written.
pub fn export_finetune_dataset(
    cohort: &Cohort,
    subset: &[String],
    template: &PromptTemplate,
    path: &Path,
) -> Result<usize, ExportError> {
    if subset.is_empty() {
        return Err(ExportError::EmptySubset);
    }
    let mut ids: Vec<&String> = subset.iter().collect();
    ids.sort();
    let system = template.system_message();
    let mut records = Vec::with_capacity(ids.len());
    for id in ids {
        let truth = cohort.truth(id).ok_or_else(|| ExportError::MissingTruth(id.clone()))?;
        let recall = cohort.recall(id, EVALUATED_DAY).ok_or_else(|| ExportError::MissingRecall(id.clone()))?;
        let food = recall
            .food_string()
            .map_err(|source| ExportError::FoodString { participant_id: id.clone(), source })?;
        records.push(FinetuneRecord {
            system: system.clone(),
            user: template.user_message(&food),
            assistant: format_target(truth),
        });
    }

    let io_err = |source| ExportError::Io { path: path.to_owned(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for record in &records {
        let line = serde_json::to_string(record).expect("finetune record serializes");
        out.write_all(line.as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(records.len())
}
