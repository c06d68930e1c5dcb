//! Joining parsed replies to ground truth.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{bland_altman, compute_metrics, parse_prediction, InvalidReason, MetricsError, ParseMode, Prediction};
use crate::inference::{load_run, InferenceResult, LoadedRun, RunError};
use crate::{BlandAltmanSummary, MetricSet, NutrientVector, ParsedPrediction};

/// Below this share of valid replies the report carries a warning.
pub const MIN_EFFECTIVE_FRACTION: f64 = 0.89;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("no ground truth for run participant {0:?}")]
    MissingTruth(String),
    #[error("none of the {0} replies parsed as six valid values")]
    NoValidPredictions(usize),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    pub mode: ParseMode,
    pub allow_partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub participant_id: String,
    pub reason: InvalidReason,
    /// Set when the backend never produced a reply.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub total: usize,
    pub effective_n: usize,
    pub excluded_n: usize,
    /// Every reason is listed, including those with a zero count.
    pub by_reason: BTreeMap<InvalidReason, usize>,
    /// Excluded replies that were backend failures rather than model output.
    pub backend_failures: usize,
    pub effective_fraction: f64,
    pub warning: Option<String>,
    pub excluded: Vec<Exclusion>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutcome {
    pub metrics: MetricSet,
    /// `None` when fewer than two replies were valid.
    pub bland_altman: Option<BlandAltmanSummary>,
    pub exclusions: ExclusionReport,
    pub predictions: Vec<ParsedPrediction>,
}

/// Parses every reply, pairs the valid ones with their truth and computes
/// the metric set. Truth must exist for every result, valid or not.
pub fn score_results(
    results: &[InferenceResult],
    truths: &BTreeMap<String, NutrientVector>,
    mode: ParseMode,
) -> Result<ScoreOutcome, ScoreError> {
    let mut sorted: Vec<&InferenceResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));

    let mut pairs = Vec::with_capacity(sorted.len());
    let mut predictions = Vec::with_capacity(sorted.len());
    let mut excluded = Vec::new();
    let mut by_reason: BTreeMap<InvalidReason, usize> = InvalidReason::ALL.iter().map(|r| (*r, 0)).collect();
    for r in sorted {
        let truth = truths.get(&r.participant_id).ok_or_else(|| ScoreError::MissingTruth(r.participant_id.clone()))?;
        let outcome = parse_prediction::<f64>(&r.raw_text, mode);
        if let Some(values) = outcome.valid() {
            pairs.push((*truth, *values));
        }
        if let Some(reason) = outcome.invalid_reason() {
            *by_reason.entry(reason).or_default() += 1;
            excluded.push(Exclusion {
                participant_id: r.participant_id.clone(),
                reason,
                backend_failure: r.failure.clone(),
            });
        }
        predictions.push(Prediction { participant_id: r.participant_id.clone(), outcome });
    }

    let total = predictions.len();
    if pairs.is_empty() {
        return Err(ScoreError::NoValidPredictions(total));
    }
    let mut metrics = compute_metrics(&pairs)?;
    metrics.excluded_n = excluded.len();
    let bland_altman = bland_altman(&pairs).ok();

    let effective_fraction = pairs.len() as f64 / total as f64;
    let warning = (effective_fraction < MIN_EFFECTIVE_FRACTION).then(|| {
        format!(
            "only {} of {} replies ({:.1}%) were valid; below the {:.0}% floor",
            pairs.len(),
            total,
            effective_fraction * 100.0,
            MIN_EFFECTIVE_FRACTION * 100.0
        )
    });
    let exclusions = ExclusionReport {
        total,
        effective_n: pairs.len(),
        excluded_n: excluded.len(),
        by_reason,
        backend_failures: excluded.iter().filter(|e| e.backend_failure.is_some()).count(),
        effective_fraction,
        warning,
        excluded,
    };
    Ok(ScoreOutcome { metrics, bland_altman, exclusions, predictions })
}

/// Loads a persisted run and scores it without contacting any backend.
pub fn score_run(
    run_dir: &Path,
    truths: &BTreeMap<String, NutrientVector>,
    options: ScoreOptions,
) -> Result<(ScoreOutcome, LoadedRun), ScoreError> {
    let run = load_run(run_dir, options.allow_partial)?;
    let outcome = score_results(&run.results, truths, options.mode)?;
    Ok((outcome, run))
}
