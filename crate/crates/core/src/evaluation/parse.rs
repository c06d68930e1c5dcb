use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{PerNutrient, Scalar};

/// Whether surface variation around the six values is tolerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// Surrounding whitespace and one trailing period are accepted.
    #[default]
    Tolerant,
    /// Surrounding whitespace only.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    WrongFieldCount,
    NonNumericField,
    ExtraText,
    NegativeValue,
    EmptyReply,
}

impl InvalidReason {
    pub const ALL: [InvalidReason; 5] = [
        InvalidReason::WrongFieldCount,
        InvalidReason::NonNumericField,
        InvalidReason::ExtraText,
        InvalidReason::NegativeValue,
        InvalidReason::EmptyReply,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InvalidReason::WrongFieldCount => "wrong_field_count",
            InvalidReason::NonNumericField => "non_numeric_field",
            InvalidReason::ExtraText => "extra_text",
            InvalidReason::NegativeValue => "negative_value",
            InvalidReason::EmptyReply => "empty_reply",
        }
    }
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionOutcome<T> {
    Valid(PerNutrient<T>),
    Invalid(InvalidReason),
}

impl<T> PredictionOutcome<T> {
    pub fn is_valid(&self) -> bool {
        matches!(self, PredictionOutcome::Valid(_))
    }

    pub fn valid(&self) -> Option<&PerNutrient<T>> {
        match self {
            PredictionOutcome::Valid(v) => Some(v),
            PredictionOutcome::Invalid(_) => None,
        }
    }

    pub fn invalid_reason(&self) -> Option<InvalidReason> {
        match self {
            PredictionOutcome::Valid(_) => None,
            PredictionOutcome::Invalid(r) => Some(*r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    pub participant_id: String,
    pub outcome: PredictionOutcome<T>,
}

/// Classifies a raw model reply.
///
/// A reply is valid when it is exactly six semicolon-separated non-negative
/// decimals. Otherwise the reason is chosen in this order: empty reply; any
/// character other than digits, `.`, `-`, `+`, `;` or whitespace (labels,
/// prose, units) is extra text; a field count other than six; a field that
/// is not a plain decimal; a negative value.
pub fn parse_prediction<T: Scalar>(raw: &str, mode: ParseMode) -> PredictionOutcome<T> {
    let mut text = raw.trim();
    if text.is_empty() {
        return PredictionOutcome::Invalid(InvalidReason::EmptyReply);
    }
    if mode == ParseMode::Tolerant {
        if let Some(stripped) = text.strip_suffix('.') {
            text = stripped.trim_end();
        }
    }
    if text
        .chars()
        .any(|c| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | ';') || c.is_whitespace()))
    {
        return PredictionOutcome::Invalid(InvalidReason::ExtraText);
    }
    let fields: Vec<&str> = text.split(';').map(str::trim).collect();
    if fields.len() != 6 {
        return PredictionOutcome::Invalid(InvalidReason::WrongFieldCount);
    }
    let mut values = [T::zero(); 6];
    for (slot, field) in values.iter_mut().zip(&fields) {
        match parse_decimal(field) {
            Some(v) => *slot = v,
            None => return PredictionOutcome::Invalid(InvalidReason::NonNumericField),
        }
    }
    if values.iter().any(|v| *v < T::zero()) {
        return PredictionOutcome::Invalid(InvalidReason::NegativeValue);
    }
    // -0 is accepted as zero
    PredictionOutcome::Valid(PerNutrient::from_array(values.map(|v| v + T::zero())))
}

/// `-?(digits[.digits] | .digits)`, finite.
fn parse_decimal<T: Scalar>(field: &str) -> Option<T> {
    let unsigned = field.strip_prefix('-').unwrap_or(field);
    let (int, frac) = match unsigned.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (unsigned, None),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    let ok = match frac {
        None => !int.is_empty() && all_digits(int),
        Some(f) => all_digits(int) && !f.is_empty() && all_digits(f),
    };
    if !ok {
        return None;
    }
    let v: f64 = field.parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    T::from_f64(v)
}
