//! Canonical CSV ingestion for participants, recall line items and ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use csv::StringRecord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    validate_descriptor, Cohort, CohortError, DietaryRecall, FoodItem, GroundTruth, ParticipantRecord,
    RecallDay, RecallQuality, Sex,
};
use crate::{Nutrient, NutrientVector};

pub const PARTICIPANT_COLUMNS: [&str; 5] =
    ["participant_id", "age_years", "sex", "breastfeeding", "recall_quality"];
pub const RECALL_COLUMNS: [&str; 6] = ["participant_id", "day", "seq", "food_code", "descriptor", "grams"];
pub const TRUTH_COLUMNS: [&str; 7] =
    ["participant_id", "kcal", "protein_g", "carb_g", "sugar_g", "fiber_g", "fat_g"];

/// Ingestion failures. Rows are 1-based data rows (the header is not counted).
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: malformed CSV: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: missing column {column:?}", path.display())]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{} row {row}, column {column}: {message}", path.display())]
    Schema { path: PathBuf, row: usize, column: &'static str, message: String },
    #[error("{} row {row}, column participant_id: unknown participant {participant_id:?}", path.display())]
    DanglingReference { path: PathBuf, row: usize, participant_id: String },
    #[error("{}: {source}", path.display())]
    Cohort { path: PathBuf, source: CohortError },
}

impl LoadError {
    pub fn path(&self) -> &Path {
        match self {
            LoadError::Io { path, .. }
            | LoadError::Csv { path, .. }
            | LoadError::MissingColumn { path, .. }
            | LoadError::Schema { path, .. }
            | LoadError::DanglingReference { path, .. }
            | LoadError::Cohort { path, .. } => path,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub participants: usize,
    pub recalls: usize,
    pub recall_items: usize,
    pub truths: usize,
}

struct Table {
    path: PathBuf,
    columns: Vec<usize>,
    rows: Vec<StringRecord>,
}

impl Table {
    fn read(path: &Path, required: &[&'static str]) -> Result<Table, LoadError> {
        let file = File::open(path).map_err(|source| LoadError::Io { path: path.to_owned(), source })?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let headers = reader
            .headers()
            .map_err(|source| LoadError::Csv { path: path.to_owned(), source })?
            .clone();
        let mut columns = Vec::with_capacity(required.len());
        for &column in required {
            let idx = headers
                .iter()
                .position(|h| h == column)
                .ok_or(LoadError::MissingColumn { path: path.to_owned(), column })?;
            columns.push(idx);
        }
        let rows = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| LoadError::Csv { path: path.to_owned(), source })?;
        Ok(Table { path: path.to_owned(), columns, rows })
    }

    fn field<'a>(&self, record: &'a StringRecord, i: usize) -> &'a str {
        record.get(self.columns[i]).unwrap_or("")
    }

    fn schema(&self, row: usize, column: &'static str, message: impl Into<String>) -> LoadError {
        LoadError::Schema { path: self.path.clone(), row, column, message: message.into() }
    }

    fn parse_f64(&self, record: &StringRecord, row: usize, i: usize, names: &[&'static str]) -> Result<f64, LoadError> {
        let raw = self.field(record, i);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.schema(row, names[i], format!("expected a number, got {raw:?}")))
    }

    fn participant_id(&self, record: &StringRecord, row: usize) -> Result<String, LoadError> {
        let id = self.field(record, 0);
        if id.is_empty() {
            return Err(self.schema(row, "participant_id", "empty participant id"));
        }
        Ok(id.to_owned())
    }
}

fn read_participants(path: &Path) -> Result<Vec<ParticipantRecord>, LoadError> {
    let table = Table::read(path, &PARTICIPANT_COLUMNS)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (i, record) in table.rows.iter().enumerate() {
        let row = i + 1;
        let participant_id = table.participant_id(record, row)?;
        if !seen.insert(participant_id.clone()) {
            return Err(table.schema(row, "participant_id", format!("duplicate participant id {participant_id:?}")));
        }
        let age_raw = table.field(record, 1);
        let age_years = age_raw
            .parse::<u32>()
            .map_err(|_| table.schema(row, "age_years", format!("expected a non-negative integer, got {age_raw:?}")))?;
        let sex = match table.field(record, 2) {
            "M" => Sex::Male,
            "F" => Sex::Female,
            "U" => Sex::Unknown,
            other => return Err(table.schema(row, "sex", format!("expected M, F or U, got {other:?}"))),
        };
        let breastfeeding = match table.field(record, 3) {
            "0" => false,
            "1" => true,
            other => return Err(table.schema(row, "breastfeeding", format!("expected 0 or 1, got {other:?}"))),
        };
        let recall_quality = match table.field(record, 4) {
            "reliable" => RecallQuality::Reliable,
            "unreliable" => RecallQuality::Unreliable,
            other => {
                return Err(table.schema(
                    row,
                    "recall_quality",
                    format!("expected reliable or unreliable, got {other:?}"),
                ))
            }
        };
        out.push(ParticipantRecord { participant_id, age_years, sex, breastfeeding, recall_quality });
    }
    Ok(out)
}

type SeqItem = (i64, usize, FoodItem);

fn read_recalls(path: &Path, known: &BTreeSet<String>) -> Result<(Vec<DietaryRecall>, usize), LoadError> {
    let table = Table::read(path, &RECALL_COLUMNS)?;
    // (participant, day) -> [(seq, file position, item)]
    let mut groups: BTreeMap<(String, RecallDay), Vec<SeqItem>> = BTreeMap::new();
    let mut first_seen: Vec<(String, RecallDay)> = Vec::new();
    for (i, record) in table.rows.iter().enumerate() {
        let row = i + 1;
        let participant_id = table.participant_id(record, row)?;
        if !known.contains(&participant_id) {
            return Err(LoadError::DanglingReference { path: table.path.clone(), row, participant_id });
        }
        let day_raw = table.field(record, 1);
        let day = day_raw
            .parse::<u8>()
            .ok()
            .and_then(RecallDay::from_number)
            .ok_or_else(|| table.schema(row, "day", format!("expected 1 or 2, got {day_raw:?}")))?;
        let seq_raw = table.field(record, 2);
        let seq = seq_raw
            .parse::<i64>()
            .map_err(|_| table.schema(row, "seq", format!("expected an integer, got {seq_raw:?}")))?;
        let food_code = table.field(record, 3).to_owned();
        let descriptor = table.field(record, 4).to_owned();
        validate_descriptor(&descriptor).map_err(|e| table.schema(row, "descriptor", e.to_string()))?;
        let grams = table.parse_f64(record, row, 5, &RECALL_COLUMNS)?;
        if grams <= 0.0 {
            return Err(table.schema(row, "grams", format!("grams must be positive, got {grams}")));
        }
        let key = (participant_id, day);
        let group = groups.entry(key.clone()).or_default();
        if group.is_empty() {
            first_seen.push(key);
        }
        group.push((seq, i, FoodItem { food_code, descriptor, grams }));
    }
    let item_count = table.rows.len();
    let recalls = first_seen
        .into_iter()
        .map(|key| {
            let mut items = groups.remove(&key).unwrap_or_default();
            items.sort_by_key(|&(seq, pos, _)| (seq, pos));
            DietaryRecall {
                participant_id: key.0,
                day: key.1,
                items: items.into_iter().map(|(_, _, item)| item).collect(),
            }
        })
        .collect();
    Ok((recalls, item_count))
}

fn read_truths(path: &Path, known: Option<&BTreeSet<String>>) -> Result<Vec<GroundTruth>, LoadError> {
    let table = Table::read(path, &TRUTH_COLUMNS)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (i, record) in table.rows.iter().enumerate() {
        let row = i + 1;
        let participant_id = table.participant_id(record, row)?;
        if known.is_some_and(|k| !k.contains(&participant_id)) {
            return Err(LoadError::DanglingReference { path: table.path.clone(), row, participant_id });
        }
        if !seen.insert(participant_id.clone()) {
            return Err(table.schema(row, "participant_id", format!("duplicate ground truth for {participant_id:?}")));
        }
        let mut values = [0.0; 6];
        for (slot, nutrient) in values.iter_mut().zip(Nutrient::ALL) {
            let col = nutrient.index() + 1;
            let v = table.parse_f64(record, row, col, &TRUTH_COLUMNS)?;
            if v < 0.0 {
                return Err(table.schema(row, TRUTH_COLUMNS[col], format!("negative value {v}")));
            }
            *slot = v;
        }
        out.push(GroundTruth { participant_id, values: NutrientVector::from_array(values) });
    }
    Ok(out)
}

/// Loads the three canonical CSV files and cross-links them.
///
/// Every recall and truth row must reference a participant in
/// `participants_path`; errors name the file, the data row and the column.
pub fn load_cohort(
    participants_path: &Path,
    recalls_path: &Path,
    truth_path: &Path,
) -> Result<(Cohort, LoadSummary), LoadError> {
    let participants = read_participants(participants_path)?;
    let known: BTreeSet<String> = participants.iter().map(|p| p.participant_id.clone()).collect();
    let (recalls, recall_items) = read_recalls(recalls_path, &known)?;
    let truths = read_truths(truth_path, Some(&known))?;
    let summary = LoadSummary {
        participants: participants.len(),
        recalls: recalls.len(),
        recall_items,
        truths: truths.len(),
    };
    let cohort = Cohort::new(participants, recalls, truths)
        .map_err(|source| LoadError::Cohort { path: participants_path.to_owned(), source })?;
    Ok((cohort, summary))
}

/// Loads a ground-truth file on its own, e.g. for re-scoring a persisted run.
pub fn load_ground_truth(truth_path: &Path) -> Result<Vec<GroundTruth>, LoadError> {
    read_truths(truth_path, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    fn fixture(dir: &Path, n: usize) -> (PathBuf, PathBuf, PathBuf) {
        let mut p = String::from("participant_id,age_years,sex,breastfeeding,recall_quality\n");
        let mut r = String::from("participant_id,day,seq,food_code,descriptor,grams\n");
        let mut t = String::from("participant_id,kcal,protein_g,carb_g,sugar_g,fiber_g,fat_g\n");
        for i in 0..n {
            p += &format!("P{i},{},F,0,reliable\n", 12 + i % 8);
            r += &format!("P{i},2,1,11000000,\"BREAD, WHITE\",{}\n", 20 + i);
            t += &format!("P{i},{},1,2,3,4,5\n", 100 + i);
        }
        (write(dir, "participants.csv", &p), write(dir, "recalls.csv", &r), write(dir, "truth.csv", &t))
    }

    #[test]
    fn loads_well_formed_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let (p, r, t) = fixture(dir.path(), 10);
        let (cohort, summary) = load_cohort(&p, &r, &t).unwrap();
        assert_eq!(summary, LoadSummary { participants: 10, recalls: 10, recall_items: 10, truths: 10 });
        assert_eq!(cohort.len(), 10);
        assert_eq!(cohort.recall("P3", RecallDay::Second).unwrap().items[0].grams, 23.0);
        assert_eq!(cohort.truth("P9").unwrap().kcal, 109.0);
    }

    #[test]
    fn dangling_recall_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let (p, _, t) = fixture(dir.path(), 3);
        let r = write(
            dir.path(),
            "recalls.csv",
            "participant_id,day,seq,food_code,descriptor,grams\nP0,2,1,1,TAFFY,3\nNOPE,2,1,1,TAFFY,3\nP2,2,1,1,TAFFY,3\n",
        );
        let err = load_cohort(&p, &r, &t).unwrap_err();
        match &err {
            LoadError::DanglingReference { row, participant_id, path } => {
                assert_eq!(*row, 2);
                assert_eq!(participant_id, "NOPE");
                assert!(path.ends_with("recalls.csv"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("recalls.csv row 2"));
    }

    #[test]
    fn non_numeric_grams_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let (p, _, t) = fixture(dir.path(), 1);
        let r = write(dir.path(), "recalls.csv", "participant_id,day,seq,food_code,descriptor,grams\nP0,2,1,1,TAFFY,abc\n");
        let err = load_cohort(&p, &r, &t).unwrap_err();
        assert!(matches!(err, LoadError::Schema { row: 1, column: "grams", .. }), "{err}");
    }

    #[test]
    fn missing_column_and_file() {
        let dir = tempfile::tempdir().unwrap();
        let (p, r, _) = fixture(dir.path(), 1);
        let t = write(dir.path(), "truth.csv", "participant_id,kcal\nP0,1\n");
        assert!(matches!(load_cohort(&p, &r, &t), Err(LoadError::MissingColumn { column: "protein_g", .. })));
        let missing = dir.path().join("absent.csv");
        let err = load_cohort(&p, &r, &missing).unwrap_err();
        assert!(matches!(err, LoadError::Io { .. }));
        assert_eq!(err.path(), missing);
    }

    #[test]
    fn items_follow_seq_then_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let (p, _, t) = fixture(dir.path(), 1);
        let r = write(
            dir.path(),
            "recalls.csv",
            "participant_id,day,seq,food_code,descriptor,grams\nP0,2,2,1,B,1\nP0,2,1,1,A,1\nP0,2,2,1,C,1\nP0,1,1,1,D,1\n",
        );
        let (cohort, summary) = load_cohort(&p, &r, &t).unwrap();
        assert_eq!(summary.recalls, 2);
        let names: Vec<_> = cohort
            .recall("P0", RecallDay::Second)
            .unwrap()
            .items
            .iter()
            .map(|i| i.descriptor.as_str())
            .collect();
        assert_eq!(names, ["A", "B", "C"]);
    }

    #[test]
    fn bad_participant_fields() {
        let dir = tempfile::tempdir().unwrap();
        let (_, r, t) = fixture(dir.path(), 1);
        for (body, column) in [
            ("P0,-1,F,0,reliable", "age_years"),
            ("P0,15,X,0,reliable", "sex"),
            ("P0,15,F,yes,reliable", "breastfeeding"),
            ("P0,15,F,0,good", "recall_quality"),
        ] {
            let p = write(
                dir.path(),
                "participants.csv",
                &format!("participant_id,age_years,sex,breastfeeding,recall_quality\n{body}\n"),
            );
            match load_cohort(&p, &r, &t) {
                Err(LoadError::Schema { column: c, .. }) => assert_eq!(c, column),
                other => panic!("{body}: {other:?}"),
            }
        }
    }
}
