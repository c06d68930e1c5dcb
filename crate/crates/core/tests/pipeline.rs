//! Render, infer, persist and score, with deterministic backends.

mod common;

use std::collections::BTreeMap;
use std::fs;

use nutrient_eval::evaluation::{parse_prediction, score_results, score_run, ParseMode, ScoreOptions};
use nutrient_eval::inference::{
    load_run, now_timestamp, persist_run, InferenceResult, run_inference, BackendConfig, BackendKind, EchoTruthBackend, RunMetadata,
    TableOracleBackend, RESULTS_FILE,
};
use nutrient_eval::prompt::{render_prompt, PromptBundle, PromptTemplate, PROMPT_FIXTURE_SHA256};
use nutrient_eval::recall::{Cohort, EVALUATED_DAY};
use nutrient_eval::synthetic::{generate, SyntheticSpec, FOODS};
use nutrient_eval::{Nutrient, NutrientVector};

fn bundles(cohort: &Cohort, template: &PromptTemplate) -> Vec<PromptBundle> {
    cohort
        .evaluable_ids(EVALUATED_DAY)
        .iter()
        .map(|id| render_prompt(template, id, &cohort.recall(id, EVALUATED_DAY).unwrap().food_string().unwrap()).unwrap())
        .collect()
}

fn config(kind: BackendKind) -> BackendConfig {
    BackendConfig { kind, parallelism: 4, ..BackendConfig::default() }
}

fn metadata(template: &PromptTemplate, n: usize, backend_id: String) -> RunMetadata {
    RunMetadata {
        config: serde_json::json!({}),
        seed: 42,
        subset_index: 1,
        prompt_checksum: template.checksum().to_owned(),
        prompt_fidelity: "verbatim".into(),
        backend_id,
        expected_results: n,
        started_at: now_timestamp(),
    }
}

#[test]
fn replay_matches_live_scoring() {
    let s = generate(SyntheticSpec::new(60, 9));
    let template = PromptTemplate::fixture(Default::default());
    let b = bundles(&s.cohort, &template);
    let backend = TableOracleBackend::new(s.table.clone());
    let mut results = run_inference(&b, &backend, &config(BackendKind::TableOracle), None).unwrap();
    results[3].raw_text = "Answer: 12".into();
    let truths: BTreeMap<String, NutrientVector> =
        s.cohort.truths().iter().map(|(k, v)| (k.clone(), v.map(|x| x * 1.1 + 3.0))).collect();
    let live = score_results(&results, &truths, ParseMode::Tolerant).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let manifest = persist_run(dir.path(), &results, &metadata(&template, b.len(), "table_oracle".into())).unwrap();
    assert_eq!(manifest.metadata.prompt_checksum, PROMPT_FIXTURE_SHA256);
    let (replayed, _) = score_run(dir.path(), &truths, ScoreOptions::default()).unwrap();
    assert_eq!(replayed.metrics, live.metrics);
    assert_eq!(replayed.exclusions, live.exclusions);
    assert_eq!(replayed.bland_altman, live.bland_altman);
}

/// Per-100 g lookup and scaling written out by hand.
fn independent_estimate(items: &[(String, f64)]) -> [f64; 6] {
    let mut total = [0.0; 6];
    for (descriptor, grams) in items {
        let (_, _, per100) = FOODS.iter().find(|(_, d, _)| d == descriptor).unwrap();
        for k in 0..6 {
            total[k] += per100[k] * grams / 100.0;
        }
    }
    total
}

#[test]
fn table_oracle_replies_match_independent_estimate() {
    let s = generate(SyntheticSpec::new(50, 4));
    let template = PromptTemplate::fixture(Default::default());
    let b = bundles(&s.cohort, &template);
    let results =
        run_inference(&b, &TableOracleBackend::new(s.table.clone()), &config(BackendKind::TableOracle), None).unwrap();
    assert_eq!(results.len(), 50);
    for r in &results {
        let items = s.cohort.recall(&r.participant_id, EVALUATED_DAY).unwrap().item_pairs();
        let expected = independent_estimate(&items);
        let got = parse_prediction::<f64>(&r.raw_text, ParseMode::Strict).valid().copied().unwrap();
        for n in Nutrient::ALL {
            let e = expected[n.index()];
            assert!((got.get(n) - e).abs() <= 0.005 + 1e-9 * e, "{} {n:?}: {} vs {e}", r.participant_id, got.get(n));
        }
    }
}

#[test]
fn deterministic_backends_are_byte_reproducible() {
    let s = generate(SyntheticSpec::new(40, 2));
    let template = PromptTemplate::fixture(Default::default());
    let b = bundles(&s.cohort, &template);
    let echo = EchoTruthBackend::new(s.cohort.truths().clone());
    let oracle = TableOracleBackend::new(s.table.clone());
    for (backend, kind) in [
        (&echo as &dyn nutrient_eval::inference::Backend, BackendKind::EchoTruth),
        (&oracle, BackendKind::TableOracle),
    ] {
        let mut files = Vec::new();
        for parallelism in [1, 7] {
            let cfg = BackendConfig { parallelism, ..config(kind) };
            let results = run_inference(&b, backend, &cfg, None).unwrap();
            let dir = tempfile::tempdir().unwrap();
            persist_run(dir.path(), &results, &metadata(&template, b.len(), backend.id())).unwrap();
            files.push(fs::read(dir.path().join(RESULTS_FILE)).unwrap());
            let zeroed: Vec<_> = results.iter().cloned().map(|r| InferenceResult { latency_ms: 0, ..r }).collect();
            assert_eq!(load_run(dir.path(), false).unwrap().results, zeroed);
        }
        assert_eq!(files[0], files[1], "{}", kind.as_str());
    }
}
