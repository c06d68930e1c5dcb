//! Seeded synthetic cohorts for tests, benchmarks and dry runs.
//!
//! Participants eat between three and fourteen items drawn from a small
//! built-in food table; each item weight is log-normal around 150 g. Ground
//! truth is the table estimate of the day-2 recall rounded to two decimals,
//! so the table-oracle backend reproduces it exactly. Nutrient values are
//! rough per-100 g figures and only need to be plausible.
//!
//! [`with_reference_truths`] swaps in truths drawn from log-normals whose
//! mean and SD match the pooled adolescent distribution instead.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::inference::{oracle_estimate, NutrientTable, TABLE_COLUMNS};
use crate::recall::{
    Cohort, DietaryRecall, FoodItem, GroundTruth, ParticipantRecord, RecallDay, RecallQuality, Sex,
    PARTICIPANT_COLUMNS, RECALL_COLUMNS, TRUTH_COLUMNS,
};
use crate::{format_decimal, round2, PerNutrient};

/// `(food code, descriptor, kcal, protein, carbohydrate, sugars, fiber, fat)` per 100 g.
pub const FOODS: [(&str, &str, [f64; 6]); 30] = [
    ("11112110", "MILK, LOW FAT (1%)", [42.0, 3.4, 5.0, 5.2, 0.0, 1.0]),
    ("11112210", "MILK, COW'S, FLUID, 2% FAT", [50.0, 3.3, 4.8, 5.1, 0.0, 2.0]),
    ("13110100", "ICE CREAM, REGULAR, NOT CHOCOLATE", [207.0, 3.5, 23.6, 21.2, 0.7, 11.0]),
    ("14010000", "CHEESE, NFS", [371.0, 22.9, 3.1, 0.6, 0.0, 30.0]),
    ("21000100", "BEEF, NS AS TO CUT, COOKED, LEAN ONLY EATEN", [198.0, 29.5, 0.0, 0.0, 0.0, 8.0]),
    ("24122120", "CHICKEN, THIGH, STEWED, W/ SKIN", [232.0, 23.3, 0.0, 0.0, 0.0, 14.7]),
    ("24198740", "CHICKEN NUGGETS, FROM FROZEN", [296.0, 15.0, 16.6, 0.4, 1.1, 19.0]),
    ("25210210", "BOLOGNA, NFS", [310.0, 11.0, 4.0, 3.0, 0.0, 27.0]),
    ("27146100", "BIG MAC (MCDONALDS)", [257.0, 11.8, 20.1, 4.0, 1.6, 14.9]),
    ("42202000", "SUNFLOWER SEEDS, HULLED, ROASTED, SALTED", [592.0, 19.3, 24.1, 2.7, 9.0, 49.8]),
    ("51000100", "BREAD, WHITE", [266.0, 8.9, 49.2, 5.7, 2.7, 3.3]),
    ("51101050", "BREAD, GARLIC", [350.0, 8.0, 42.0, 3.0, 2.0, 16.0]),
    ("52215200", "TORTILLA, CORN", [218.0, 5.7, 44.6, 0.9, 6.3, 2.9]),
    ("53209005", "COOKIE, MARSHMALLOW, W/ RICE CEREAL (NO-BAKE)", [414.0, 3.2, 76.0, 38.0, 0.4, 10.8]),
    ("56205000", "RICE, WHITE, COOKED, REGULAR, NO FAT ADD IN COOKING", [130.0, 2.7, 28.2, 0.1, 0.4, 0.3]),
    ("57000000", "CEREAL, READY-TO-EAT, NFS", [379.0, 7.5, 84.1, 21.4, 4.5, 2.6]),
    ("57206000", "FROSTED FLAKES, KELLOGG'S", [375.0, 4.4, 89.2, 35.3, 1.9, 0.6]),
    ("58106210", "PIZZA, CHEESE, THIN CRUST", [291.0, 12.2, 29.6, 3.6, 1.8, 13.7]),
    ("58145112", "MACARONI OR NOODLES WITH CHEESE, MADE FROM PACKAGED MIX", [164.0, 5.9, 20.6, 3.5, 1.0, 6.5]),
    ("61210220", "APPLE JUICE, 100%", [46.0, 0.1, 11.3, 9.6, 0.2, 0.1]),
    ("63101000", "APPLE, RAW", [52.0, 0.3, 13.8, 10.4, 2.4, 0.2]),
    ("63223020", "STRAWBERRIES, RAW", [32.0, 0.7, 7.7, 4.9, 2.0, 0.3]),
    ("63149010", "PLUM, RAW", [46.0, 0.7, 11.4, 9.9, 1.4, 0.3]),
    ("64104010", "GRAPE JUICE", [60.0, 0.4, 14.8, 14.2, 0.2, 0.1]),
    ("71000100", "POTATO, NFS", [93.0, 2.5, 21.2, 1.2, 2.2, 0.1]),
    ("71401020", "POTATO, FRENCH FRIES, FAST FOOD", [312.0, 3.4, 41.4, 0.3, 3.8, 14.7]),
    ("72201230", "BROCCOLI, COOKED, FROM FRESH, FAT NOT ADDED IN COOKING", [35.0, 2.4, 7.2, 1.4, 3.3, 0.4]),
    ("92410310", "SOFT DRINK, FRUIT FLAVORED, CAFFEINE FREE", [48.0, 0.0, 12.3, 12.3, 0.0, 0.0]),
    ("92510610", "FRUIT JUICE DRINK", [47.0, 0.1, 11.9, 11.4, 0.1, 0.0]),
    ("94000100", "WATER, BOTTLED, PLAIN", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
];

/// Pooled-cohort means, in nutrient order.
pub const REFERENCE_MEANS: [f64; 6] = [1957.0, 73.77, 251.80, 114.38, 13.56, 74.34];
/// Pooled-cohort standard deviations, in nutrient order.
pub const REFERENCE_SDS: [f64; 6] = [946.29, 40.99, 127.48, 73.04, 8.49, 43.46];

/// Log-normals with the reference mean and SD, one per nutrient.
pub fn reference_distributions() -> [LogNormal<f64>; 6] {
    std::array::from_fn(|i| {
        let cv2 = (REFERENCE_SDS[i] / REFERENCE_MEANS[i]).powi(2);
        let sigma2 = cv2.ln_1p();
        LogNormal::new(REFERENCE_MEANS[i].ln() - sigma2 / 2.0, sigma2.sqrt()).expect("valid log-normal parameters")
    })
}

/// Replaces every truth with a rounded draw from [`reference_distributions`].
pub fn with_reference_truths(cohort: &Cohort, seed: u64) -> Cohort {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists = reference_distributions();
    let truths = cohort
        .ground_truth()
        .into_iter()
        .map(|t| GroundTruth {
            participant_id: t.participant_id,
            values: PerNutrient::from_fn(|n| round2(dists[n.index()].sample(&mut rng))),
        })
        .collect();
    Cohort::new(cohort.participants().to_vec(), cohort.recalls().cloned().collect(), truths)
        .expect("same participants and recalls")
}

/// The built-in food table.
pub fn food_table() -> NutrientTable<f64> {
    let mut table = NutrientTable::new();
    for (_, descriptor, values) in FOODS {
        table.insert(descriptor, PerNutrient::from_array(values)).expect("built-in food table is valid");
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    /// Participants that pass every eligibility filter.
    pub eligible: usize,
    /// Extra participants failing one filter each, cycling through age,
    /// breastfeeding and recall quality.
    pub ineligible: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(eligible: usize, seed: u64) -> Self {
        SyntheticSpec { eligible, ineligible: 0, seed }
    }
}

pub struct SyntheticCohort {
    pub cohort: Cohort,
    pub table: NutrientTable<f64>,
}

/// Paths written by [`SyntheticCohort::write_csv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixturePaths {
    pub participants: PathBuf,
    pub recalls: PathBuf,
    pub truth: PathBuf,
    pub nutrient_table: PathBuf,
}

fn random_recall(rng: &mut ChaCha8Rng, participant_id: &str, day: RecallDay, weights: &LogNormal<f64>) -> DietaryRecall {
    let n_items = rng.random_range(3..=14);
    let items = (0..n_items)
        .map(|_| {
            let (code, descriptor, _) = FOODS[rng.random_range(0..FOODS.len())];
            let grams = round2(weights.sample(rng).clamp(5.0, 1500.0));
            FoodItem::new(code, descriptor, grams).expect("built-in foods are valid")
        })
        .collect();
    DietaryRecall { participant_id: participant_id.to_owned(), day, items }
}

/// Generates a cohort; the same spec always yields the same cohort.
pub fn generate(spec: SyntheticSpec) -> SyntheticCohort {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = LogNormal::new(150f64.ln(), 0.8).expect("valid log-normal parameters");
    let table = food_table();
    let total = spec.eligible + spec.ineligible;
    let mut participants = Vec::with_capacity(total);
    let mut recalls = Vec::with_capacity(2 * total);
    let mut truths = Vec::with_capacity(total);
    for i in 0..total {
        let participant_id = format!("P{:06}", i + 1);
        let mut record = ParticipantRecord {
            participant_id: participant_id.clone(),
            age_years: rng.random_range(12..=19),
            sex: if rng.random_bool(0.5) { Sex::Male } else { Sex::Female },
            breastfeeding: false,
            recall_quality: RecallQuality::Reliable,
        };
        if i >= spec.eligible {
            match (i - spec.eligible) % 3 {
                0 => record.age_years = 20 + rng.random_range(0..10),
                1 => {
                    record.sex = Sex::Female;
                    record.breastfeeding = true;
                }
                _ => record.recall_quality = RecallQuality::Unreliable,
            }
        }
        participants.push(record);
        recalls.push(random_recall(&mut rng, &participant_id, RecallDay::First, &weights));
        let day2 = random_recall(&mut rng, &participant_id, RecallDay::Second, &weights);
        let estimate = oracle_estimate(&day2.item_pairs(), &table).expect("built-in foods are in the table");
        truths.push(GroundTruth { participant_id, values: estimate.round2() });
        recalls.push(day2);
    }
    let cohort = Cohort::new(participants, recalls, truths).expect("synthetic cohort is consistent");
    SyntheticCohort { cohort, table }
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

impl SyntheticCohort {
    /// Writes the cohort and food table in the ingestion CSV formats.
    pub fn write_csv(&self, dir: &Path) -> io::Result<FixturePaths> {
        fs::create_dir_all(dir)?;
        let paths = FixturePaths {
            participants: dir.join("participants.csv"),
            recalls: dir.join("recalls.csv"),
            truth: dir.join("truth.csv"),
            nutrient_table: dir.join("nutrient_table.csv"),
        };

        let mut w = csv::Writer::from_path(&paths.participants).map_err(csv_error)?;
        w.write_record(PARTICIPANT_COLUMNS).map_err(csv_error)?;
        for p in self.cohort.participants() {
            let sex = match p.sex {
                Sex::Male => "M",
                Sex::Female => "F",
                Sex::Unknown => "U",
            };
            let quality = match p.recall_quality {
                RecallQuality::Reliable => "reliable",
                RecallQuality::Unreliable => "unreliable",
            };
            let age = p.age_years.to_string();
            let bf = if p.breastfeeding { "1" } else { "0" };
            w.write_record([p.participant_id.as_str(), &age, sex, bf, quality]).map_err(csv_error)?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(&paths.recalls).map_err(csv_error)?;
        w.write_record(RECALL_COLUMNS).map_err(csv_error)?;
        for r in self.cohort.recalls() {
            let day = r.day.number().to_string();
            for (seq, item) in r.items.iter().enumerate() {
                let seq = (seq + 1).to_string();
                let grams = format_decimal(item.grams);
                w.write_record([r.participant_id.as_str(), &day, &seq, &item.food_code, &item.descriptor, &grams])
                    .map_err(csv_error)?;
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(&paths.truth).map_err(csv_error)?;
        w.write_record(TRUTH_COLUMNS).map_err(csv_error)?;
        for (id, values) in self.cohort.truths() {
            let mut row = vec![id.clone()];
            row.extend(values.into_array().map(format_decimal));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(&paths.nutrient_table).map_err(csv_error)?;
        w.write_record(TABLE_COLUMNS).map_err(csv_error)?;
        for descriptor in self.table.descriptors() {
            let mut row = vec![descriptor.to_owned()];
            row.extend(self.table.get(descriptor).expect("listed descriptor").into_array().map(format_decimal));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(paths)
    }
}
