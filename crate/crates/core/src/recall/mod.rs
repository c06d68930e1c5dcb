//! Participants, dietary recalls and ground truth: loading, eligibility,
//! food-string rendering and cohort partitioning.

mod food_string;
mod load;
mod partition;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::NutrientVector;

pub use food_string::{parse_food_string, render_food_string, FoodStringError};
pub use load::{
    load_cohort, load_ground_truth, LoadError, LoadSummary, PARTICIPANT_COLUMNS, RECALL_COLUMNS, TRUTH_COLUMNS,
};
pub use partition::{partition_cohort, subset_sizes, CohortPartition, PartitionError, PartitionSpec};

/// Youngest and oldest eligible ages, inclusive.
pub const MIN_ELIGIBLE_AGE: u32 = 12;
pub const MAX_ELIGIBLE_AGE: u32 = 19;

/// Only second-day recalls are evaluated.
pub const EVALUATED_DAY: RecallDay = RecallDay::Second;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecallQuality {
    Reliable,
    Unreliable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RecallDay {
    First,
    Second,
}

impl RecallDay {
    pub fn from_number(day: u8) -> Option<RecallDay> {
        match day {
            1 => Some(RecallDay::First),
            2 => Some(RecallDay::Second),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            RecallDay::First => 1,
            RecallDay::Second => 2,
        }
    }
}

impl fmt::Display for RecallDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "day {}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub participant_id: String,
    pub age_years: u32,
    pub sex: Sex,
    pub breastfeeding: bool,
    pub recall_quality: RecallQuality,
}

impl ParticipantRecord {
    pub fn is_eligible(&self) -> bool {
        self.ineligibility().is_none()
    }

    /// First eligibility criterion this participant fails, checked in the
    /// order age, breastfeeding, recall quality.
    pub fn ineligibility(&self) -> Option<Ineligibility> {
        if !(MIN_ELIGIBLE_AGE..=MAX_ELIGIBLE_AGE).contains(&self.age_years) {
            Some(Ineligibility::Age)
        } else if self.breastfeeding {
            Some(Ineligibility::Breastfeeding)
        } else if self.recall_quality != RecallQuality::Reliable {
            Some(Ineligibility::RecallQuality)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ineligibility {
    Age,
    Breastfeeding,
    RecallQuality,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescriptorError {
    #[error("descriptor is empty")]
    Empty,
    #[error("descriptor {0:?} has leading or trailing whitespace")]
    Whitespace(String),
    #[error("descriptor {0:?} contains the reserved character ';'")]
    Semicolon(String),
    #[error("descriptor {0:?} has unbalanced parentheses")]
    UnbalancedParentheses(String),
    #[error("descriptor {0:?} is not uppercase")]
    NotUppercase(String),
    #[error("grams must be finite and positive, got {0}")]
    Grams(f64),
}

/// Checks a descriptor against the food-string grammar.
///
/// Semicolons separate items and are always rejected. Parentheses are
/// allowed when balanced, since real food descriptors carry qualifiers such
/// as `MILK, LOW FAT (1%)`; the amount is always the last parenthesized
/// group of an item.
pub fn validate_descriptor(descriptor: &str) -> Result<(), DescriptorError> {
    if descriptor.trim().is_empty() {
        return Err(DescriptorError::Empty);
    }
    if descriptor.trim() != descriptor {
        return Err(DescriptorError::Whitespace(descriptor.to_owned()));
    }
    if descriptor.contains(';') {
        return Err(DescriptorError::Semicolon(descriptor.to_owned()));
    }
    if !parentheses_balanced(descriptor) {
        return Err(DescriptorError::UnbalancedParentheses(descriptor.to_owned()));
    }
    if descriptor.chars().any(char::is_lowercase) {
        return Err(DescriptorError::NotUppercase(descriptor.to_owned()));
    }
    Ok(())
}

pub(crate) fn parentheses_balanced(text: &str) -> bool {
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '(' => depth += 1,
            ')' => match depth.checked_sub(1) {
                Some(d) => depth = d,
                None => return false,
            },
            _ => {}
        }
    }
    depth == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodItem {
    pub food_code: String,
    pub descriptor: String,
    pub grams: f64,
}

impl FoodItem {
    pub fn new(
        food_code: impl Into<String>,
        descriptor: impl Into<String>,
        grams: f64,
    ) -> Result<FoodItem, DescriptorError> {
        let descriptor = descriptor.into();
        validate_descriptor(&descriptor)?;
        if !(grams.is_finite() && grams > 0.0) {
            return Err(DescriptorError::Grams(grams));
        }
        Ok(FoodItem { food_code: food_code.into(), descriptor, grams })
    }
}

/// One participant-day; items keep their source order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DietaryRecall {
    pub participant_id: String,
    pub day: RecallDay,
    pub items: Vec<FoodItem>,
}

impl DietaryRecall {
    pub fn food_string(&self) -> Result<String, FoodStringError> {
        render_food_string(self)
    }

    pub fn item_pairs(&self) -> Vec<(String, f64)> {
        self.items.iter().map(|i| (i.descriptor.clone(), i.grams)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub participant_id: String,
    pub values: NutrientVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohortError {
    #[error("duplicate participant id {0:?}")]
    DuplicateParticipant(String),
    #[error("empty participant id")]
    EmptyParticipantId,
    #[error("{kind} references unknown participant {participant_id:?}")]
    Dangling { kind: &'static str, participant_id: String },
    #[error("duplicate {day} recall for participant {participant_id:?}")]
    DuplicateRecall { participant_id: String, day: RecallDay },
    #[error("recall for participant {0:?} has no items")]
    EmptyRecall(String),
    #[error("duplicate ground truth for participant {0:?}")]
    DuplicateTruth(String),
    #[error("ground truth for participant {0:?} has a negative or non-finite value")]
    InvalidTruth(String),
}

/// Cross-linked participants, recalls and ground truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cohort {
    participants: Vec<ParticipantRecord>,
    recalls: BTreeMap<(String, RecallDay), DietaryRecall>,
    truths: BTreeMap<String, NutrientVector>,
}

impl Cohort {
    pub fn new(
        participants: Vec<ParticipantRecord>,
        recalls: Vec<DietaryRecall>,
        truths: Vec<GroundTruth>,
    ) -> Result<Cohort, CohortError> {
        let mut ids = BTreeSet::new();
        for p in &participants {
            if p.participant_id.is_empty() {
                return Err(CohortError::EmptyParticipantId);
            }
            if !ids.insert(p.participant_id.as_str()) {
                return Err(CohortError::DuplicateParticipant(p.participant_id.clone()));
            }
        }
        let mut recall_map = BTreeMap::new();
        for r in recalls {
            if !ids.contains(r.participant_id.as_str()) {
                return Err(CohortError::Dangling { kind: "recall", participant_id: r.participant_id });
            }
            if r.items.is_empty() {
                return Err(CohortError::EmptyRecall(r.participant_id));
            }
            let key = (r.participant_id.clone(), r.day);
            if recall_map.contains_key(&key) {
                return Err(CohortError::DuplicateRecall { participant_id: r.participant_id, day: r.day });
            }
            recall_map.insert(key, r);
        }
        let mut truth_map = BTreeMap::new();
        for t in truths {
            if !ids.contains(t.participant_id.as_str()) {
                return Err(CohortError::Dangling { kind: "ground truth", participant_id: t.participant_id });
            }
            if !t.values.is_valid() {
                return Err(CohortError::InvalidTruth(t.participant_id));
            }
            if truth_map.insert(t.participant_id.clone(), t.values).is_some() {
                return Err(CohortError::DuplicateTruth(t.participant_id));
            }
        }
        Ok(Cohort { participants, recalls: recall_map, truths: truth_map })
    }

    pub fn participants(&self) -> &[ParticipantRecord] {
        &self.participants
    }

    pub fn participant(&self, participant_id: &str) -> Option<&ParticipantRecord> {
        self.participants.iter().find(|p| p.participant_id == participant_id)
    }

    pub fn recalls(&self) -> impl Iterator<Item = &DietaryRecall> {
        self.recalls.values()
    }

    pub fn recall(&self, participant_id: &str, day: RecallDay) -> Option<&DietaryRecall> {
        self.recalls.get(&(participant_id.to_owned(), day))
    }

    pub fn truth(&self, participant_id: &str) -> Option<&NutrientVector> {
        self.truths.get(participant_id)
    }

    pub fn truths(&self) -> &BTreeMap<String, NutrientVector> {
        &self.truths
    }

    pub fn ground_truth(&self) -> Vec<GroundTruth> {
        self.truths
            .iter()
            .map(|(id, v)| GroundTruth { participant_id: id.clone(), values: *v })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    pub fn recall_count(&self) -> usize {
        self.recalls.len()
    }

    pub fn truth_count(&self) -> usize {
        self.truths.len()
    }

    /// Participants in file order that have a recall for `day` and a ground
    /// truth row, i.e. the ones that can be prompted and scored.
    pub fn evaluable_ids(&self, day: RecallDay) -> Vec<String> {
        self.participants
            .iter()
            .map(|p| &p.participant_id)
            .filter(|id| self.recall(id, day).is_some() && self.truths.contains_key(*id))
            .cloned()
            .collect()
    }

    /// Keeps participants aged 12 to 19 inclusive who are not breastfeeding
    /// and whose recall is reliable, dropping the recalls and truths of
    /// everyone else.
    pub fn filter_eligible(&self) -> (Cohort, EligibilityReport) {
        let mut report = EligibilityReport { loaded: self.participants.len(), ..Default::default() };
        let mut kept = Vec::new();
        for p in &self.participants {
            match p.ineligibility() {
                None => kept.push(p.clone()),
                Some(Ineligibility::Age) => report.removed_age += 1,
                Some(Ineligibility::Breastfeeding) => report.removed_breastfeeding += 1,
                Some(Ineligibility::RecallQuality) => report.removed_recall_quality += 1,
            }
        }
        report.eligible = kept.len();
        let ids: BTreeSet<&str> = kept.iter().map(|p| p.participant_id.as_str()).collect();
        let recalls = self
            .recalls
            .iter()
            .filter(|((id, _), _)| ids.contains(id.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let truths = self
            .truths
            .iter()
            .filter(|(id, _)| ids.contains(id.as_str()))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        (Cohort { participants: kept, recalls, truths }, report)
    }

    /// Restricts the cohort to the given participants, keeping file order.
    pub fn restrict_to(&self, participant_ids: &[String]) -> Cohort {
        let ids: BTreeSet<&str> = participant_ids.iter().map(String::as_str).collect();
        Cohort {
            participants: self
                .participants
                .iter()
                .filter(|p| ids.contains(p.participant_id.as_str()))
                .cloned()
                .collect(),
            recalls: self
                .recalls
                .iter()
                .filter(|((id, _), _)| ids.contains(id.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            truths: self
                .truths
                .iter()
                .filter(|(id, _)| ids.contains(id.as_str()))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }
}

/// Participants removed by each eligibility criterion, applied in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EligibilityReport {
    pub loaded: usize,
    pub removed_age: usize,
    pub removed_breastfeeding: usize,
    pub removed_recall_quality: usize,
    pub eligible: usize,
}

impl EligibilityReport {
    pub fn removed(&self) -> usize {
        self.removed_age + self.removed_breastfeeding + self.removed_recall_quality
    }
}
