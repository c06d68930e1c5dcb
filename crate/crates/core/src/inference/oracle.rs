//! Deterministic stand-ins for a model: a per-100 g nutrient table and a
//! ground-truth echo.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{Backend, BackendError};
use crate::prompt::{format_target, PromptBundle};
use crate::recall::{parse_food_string, validate_descriptor};
use crate::{NutrientVector, PerNutrient, Scalar};

pub const TABLE_COLUMNS: [&str; 7] =
    ["descriptor", "kcal_100g", "protein_100g", "carb_100g", "sugar_100g", "fiber_100g", "fat_100g"];

const RECALL_PREFIX: &str = "24-hour dietary recall: ";

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("unknown food descriptor {0:?}")]
    UnknownDescriptor(String),
    #[error("cannot read nutrient table {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("nutrient table {}: {message}", path.display())]
    Table { path: PathBuf, message: String },
}

/// Per-100 g nutrient vectors keyed by food descriptor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NutrientTable<T = f64> {
    rows: BTreeMap<String, PerNutrient<T>>,
}

impl<T: Scalar> NutrientTable<T> {
    pub fn new() -> Self {
        NutrientTable { rows: BTreeMap::new() }
    }

    /// Adds a row; rejects non-grammar descriptors and negative values.
    pub fn insert(&mut self, descriptor: impl Into<String>, per_100g: PerNutrient<T>) -> Result<(), String> {
        let descriptor = descriptor.into();
        validate_descriptor(&descriptor).map_err(|e| e.to_string())?;
        if !per_100g.is_valid() {
            return Err(format!("{descriptor:?} has a negative or non-finite value"));
        }
        if self.rows.insert(descriptor.clone(), per_100g).is_some() {
            return Err(format!("duplicate descriptor {descriptor:?}"));
        }
        Ok(())
    }

    pub fn get(&self, descriptor: &str) -> Option<&PerNutrient<T>> {
        self.rows.get(descriptor)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }
}

/// Loads `descriptor,kcal_100g,protein_100g,carb_100g,sugar_100g,fiber_100g,fat_100g`.
pub fn load_nutrient_table(path: &Path) -> Result<NutrientTable<f64>, OracleError> {
    let table_err = |message: String| OracleError::Table { path: path.to_owned(), message };
    let file = File::open(path).map_err(|source| OracleError::Io { path: path.to_owned(), source })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| table_err(e.to_string()))?.clone();
    let mut idx = [0usize; 7];
    for (slot, column) in idx.iter_mut().zip(TABLE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| table_err(format!("missing column {column:?}")))?;
    }
    let mut table = NutrientTable::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| table_err(e.to_string()))?;
        let mut values = [0.0; 6];
        for (k, slot) in values.iter_mut().enumerate() {
            let raw = record.get(idx[k + 1]).unwrap_or("");
            *slot = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| table_err(format!("row {row}, column {}: expected a number, got {raw:?}", TABLE_COLUMNS[k + 1])))?;
        }
        let descriptor = record.get(idx[0]).unwrap_or("");
        table
            .insert(descriptor, PerNutrient::from_array(values))
            .map_err(|m| table_err(format!("row {row}: {m}")))?;
    }
    Ok(table)
}

/// Component-wise sum of `per_100g * grams / 100` over the items.
///
/// Contributions are summed in a canonical order so the result does not
/// depend on the order of `items`, bit for bit.
pub fn oracle_estimate<T: Scalar>(items: &[(String, T)], table: &NutrientTable<T>) -> Result<PerNutrient<T>, OracleError> {
    let mut rows: Vec<(&str, T, &PerNutrient<T>)> = Vec::with_capacity(items.len());
    for (descriptor, grams) in items {
        let per_100g = table.get(descriptor).ok_or_else(|| OracleError::UnknownDescriptor(descriptor.clone()))?;
        rows.push((descriptor.as_str(), *grams, per_100g));
    }
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal)));
    let hundred = T::lit(100.0);
    Ok(rows
        .iter()
        .fold(PerNutrient::zero(), |acc, (_, grams, per_100g)| acc.add(&per_100g.scale(*grams / hundred))))
}

/// Reads the food string back out of the rendered user message, looks every
/// item up in the table and replies with the formatted totals.
pub struct TableOracleBackend {
    table: NutrientTable<f64>,
}

impl TableOracleBackend {
    pub fn new(table: NutrientTable<f64>) -> Self {
        TableOracleBackend { table }
    }

    pub fn estimate_from_prompt(&self, bundle: &PromptBundle) -> Result<NutrientVector, BackendError> {
        let food = bundle
            .user_message
            .lines()
            .find_map(|l| l.strip_prefix(RECALL_PREFIX))
            .ok_or_else(|| BackendError::fatal("user message has no dietary recall line"))?;
        let items = parse_food_string(food).map_err(|e| BackendError::fatal(e.to_string()))?;
        oracle_estimate(&items, &self.table).map_err(|e| BackendError::fatal(e.to_string()))
    }
}

impl Backend for TableOracleBackend {
    fn id(&self) -> String {
        format!("table_oracle:{}-rows", self.table.len())
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, BackendError> {
        self.estimate_from_prompt(bundle).map(|v| format_target(&v))
    }
}

/// Replies with each participant's own ground truth; used to check the
/// pipeline end to end under perfect agreement.
pub struct EchoTruthBackend {
    truths: BTreeMap<String, NutrientVector>,
}

impl EchoTruthBackend {
    pub fn new(truths: BTreeMap<String, NutrientVector>) -> Self {
        EchoTruthBackend { truths }
    }
}

impl Backend for EchoTruthBackend {
    fn id(&self) -> String {
        "echo_truth".to_owned()
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, BackendError> {
        self.truths
            .get(&bundle.participant_id)
            .map(format_target)
            .ok_or_else(|| BackendError::fatal(format!("no ground truth for {:?}", bundle.participant_id)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn taffy_table() -> NutrientTable<f64> {
        let mut t = NutrientTable::new();
        t.insert("TAFFY", PerNutrient::from_array([400.0, 1.0, 90.0, 70.0, 0.0, 8.0])).unwrap();
        t.insert("BREAD, WHITE", PerNutrient::from_array([266.0, 8.9, 49.2, 5.7, 2.7, 3.3])).unwrap();
        t
    }

    #[test]
    fn taffy_scaling() {
        // 15.6 g is 0.156 of the per-100 g row
        let v = oracle_estimate(&[("TAFFY".to_string(), 15.6)], &taffy_table()).unwrap();
        assert_eq!(format_target(&v), "62.4; 0.16; 14.04; 10.92; 0; 1.25");
    }

    #[test]
    fn empty_unit_and_additive() {
        let t = taffy_table();
        assert_eq!(oracle_estimate(&[], &t).unwrap(), PerNutrient::zero());
        assert_eq!(oracle_estimate(&[("TAFFY".into(), 100.0)], &t).unwrap(), *t.get("TAFFY").unwrap());
        let halves = oracle_estimate(&[("BREAD, WHITE".into(), 50.0), ("BREAD, WHITE".into(), 50.0)], &t).unwrap();
        let whole = oracle_estimate(&[("BREAD, WHITE".into(), 100.0)], &t).unwrap();
        for (n, v) in halves.iter() {
            assert_relative_eq!(*v, *whole.get(n), max_relative = 1e-12);
        }
    }

    #[test]
    fn unknown_descriptor_is_named() {
        let err = oracle_estimate(&[("FUDGE".to_string(), 1.0)], &taffy_table()).unwrap_err();
        assert!(err.to_string().contains("FUDGE"));
    }

    #[test]
    fn table_rejects_bad_rows() {
        let mut t = taffy_table();
        assert!(t.insert("TAFFY", PerNutrient::zero()).is_err());
        assert!(t.insert("fudge", PerNutrient::zero()).is_err());
        assert!(t.insert("FUDGE", PerNutrient::from_array([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn backend_reads_prompt() {
        let b = TableOracleBackend::new(taffy_table());
        let bundle = PromptBundle {
            participant_id: "P".into(),
            system_message: String::new(),
            user_message: "Patient Input:\n\n24-hour dietary recall: TAFFY (15.6)\n\nReturn only".into(),
        };
        assert_eq!(b.complete(&bundle).unwrap(), "62.4; 0.16; 14.04; 10.92; 0; 1.25");
        let bad = PromptBundle { user_message: "nothing here".into(), ..bundle };
        assert!(!b.complete(&bad).unwrap_err().retryable);
    }

    #[test]
    fn loads_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("table.csv");
        std::fs::write(
            &p,
            "descriptor,kcal_100g,protein_100g,carb_100g,sugar_100g,fiber_100g,fat_100g\nTAFFY,400,1,90,70,0,8\n\"MILK, LOW FAT (1%)\",42,3.4,5,5,0,1\n",
        )
        .unwrap();
        let t = load_nutrient_table(&p).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("MILK, LOW FAT (1%)").unwrap().kcal, 42.0);
        std::fs::write(&p, "descriptor,kcal_100g\nTAFFY,1\n").unwrap();
        assert!(load_nutrient_table(&p).is_err());
    }

    fn table_and_items() -> impl Strategy<Value = (NutrientTable<f64>, Vec<(String, f64)>)> {
        let rows = proptest::collection::vec(proptest::array::uniform6(0.0f64..900.0), 1..8);
        rows.prop_flat_map(|rows| {
            let n = rows.len();
            let items = proptest::collection::vec((0..n, 0.5f64..800.0), 0..12);
            (Just(rows), items)
        })
        .prop_map(|(rows, items)| {
            let mut t = NutrientTable::new();
            for (i, r) in rows.iter().enumerate() {
                t.insert(format!("FOOD {i}"), PerNutrient::from_array(*r)).unwrap();
            }
            let items = items.into_iter().map(|(i, g)| (format!("FOOD {i}"), g)).collect();
            (t, items)
        })
    }

    proptest! {
        #[test]
        fn linear_in_grams((table, items) in table_and_items(), k in 0.01f64..50.0) {
            let base = oracle_estimate(&items, &table).unwrap();
            let scaled_items: Vec<_> = items.iter().map(|(d, g)| (d.clone(), g * k)).collect();
            let scaled = oracle_estimate(&scaled_items, &table).unwrap();
            for (n, v) in scaled.iter() {
                let expected = base.get(n) * k;
                prop_assert!((v - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{n}: {v} vs {expected}");
            }
        }

        #[test]
        fn permutation_invariant((table, items) in table_and_items(), seed: u64) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = items.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(oracle_estimate(&items, &table).unwrap(), oracle_estimate(&shuffled, &table).unwrap());
        }
    }
}
