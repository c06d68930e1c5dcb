#![allow(dead_code)]

pub mod calibration;
pub mod reference;

use std::collections::BTreeMap;

use nutrient_eval::evaluation::InvalidReason;
use nutrient_eval::inference::InferenceResult;
use nutrient_eval::prompt::format_target;
use nutrient_eval::{NutrientVector, PerNutrient};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Malformed replies and the reason each must be rejected with.
pub const MALFORMED: [(&str, InvalidReason); 20] = [
    ("", InvalidReason::EmptyReply),
    ("   \n\t", InvalidReason::EmptyReply),
    ("kcal: 1200; 50; 100; 40; 10; 30", InvalidReason::ExtraText),
    ("Answer: 1293; 48.28; 135.41; 29.22; 13.2; 62.15", InvalidReason::ExtraText),
    ("Assistant: 1; 2; 3; 4; 5; 6", InvalidReason::ExtraText),
    ("1293 kcal; 48.28 g; 135.41 g; 29.22 g; 13.2 g; 62.15 g", InvalidReason::ExtraText),
    ("The estimates are 1293; 48.28; 135.41; 29.22; 13.2; 62.15", InvalidReason::ExtraText),
    ("N/A", InvalidReason::ExtraText),
    ("1293, 48.28, 135.41, 29.22, 13.2, 62.15", InvalidReason::ExtraText),
    ("1; 2; 3; 4; 5", InvalidReason::WrongFieldCount),
    ("1; 2; 3; 4; 5; 6; 7", InvalidReason::WrongFieldCount),
    ("1293", InvalidReason::WrongFieldCount),
    ("1; 2; 3; 4; 5; 6;", InvalidReason::WrongFieldCount),
    ("1; 2; ; 4; 5; 6", InvalidReason::NonNumericField),
    ("1; 2; 3..5; 4; 5; 6", InvalidReason::NonNumericField),
    ("1; 2; +3; 4; 5; 6", InvalidReason::NonNumericField),
    ("1; 2; 3; 4 5; 5; 6", InvalidReason::NonNumericField),
    ("1; 2; 3; 4; 5; 6..", InvalidReason::NonNumericField),
    ("-1; 2; 3; 4; 5; 6", InvalidReason::NegativeValue),
    ("1293; 48.28; -135.41; 29.22; 13.2; 62.15", InvalidReason::NegativeValue),
];

/// Seeded truth/prediction pairs with noise, bias and some zero truths.
pub fn random_pairs(n: usize, seed: u64) -> Vec<(NutrientVector, NutrientVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.25).unwrap();
    let scales: [f64; 6] = [1957.0, 73.77, 251.8, 114.38, 13.56, 74.34];
    (0..n)
        .map(|_| {
            let truth = PerNutrient::from_fn(|k| {
                if rng.random_bool(0.01) {
                    0.0
                } else {
                    scales[k.index()] * rng.random_range(0.05..2.5)
                }
            });
            let pred = PerNutrient::from_fn(|k| {
                let t: f64 = *truth.get(k);
                (t * (1.0 + noise.sample(&mut rng)) + scales[k.index()] * 0.05).max(0.0)
            });
            (truth, pred)
        })
        .collect()
}

pub fn result(participant_id: &str, raw_text: &str) -> InferenceResult {
    InferenceResult {
        participant_id: participant_id.to_owned(),
        raw_text: raw_text.to_owned(),
        backend_id: "fixture".to_owned(),
        latency_ms: 0,
        attempt_count: 1,
        failure: None,
    }
}

/// `n` exact replies of which the first `corrupted` are replaced by
/// alternating `"N/A"` and five-field replies.
pub fn corrupted_run(
    truths: &BTreeMap<String, NutrientVector>,
    corrupted: usize,
) -> Vec<InferenceResult> {
    truths
        .iter()
        .enumerate()
        .map(|(i, (id, v))| {
            let raw = if i < corrupted {
                if i % 2 == 0 { "N/A".to_owned() } else { "1; 2; 3; 4; 5".to_owned() }
            } else {
                format_target(v)
            };
            result(id, &raw)
        })
        .collect()
}
