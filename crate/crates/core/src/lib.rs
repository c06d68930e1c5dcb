//! Batch evaluation harness for estimating energy and macronutrients from
//! text-only 24-hour dietary recalls with a chat-completion model.
//!
//! The pipeline is split into four stages that share a single run-directory
//! convention:
//!
//! * [`recall`] loads participants, recall line items and ground truth from
//!   CSV, applies the eligibility filters, renders food strings and
//!   partitions the cohort.
//! * [`prompt`] holds the ten-shot prompt fixture, renders per-participant
//!   prompt bundles and exports the fine-tuning dataset.
//! * [`inference`] sends bundles to a backend (remote chat endpoint,
//!   nutrient-table oracle, or ground-truth echo) and persists raw replies.
//! * [`evaluation`] parses replies with the strict six-value grammar,
//!   computes the validation statistics and draws Bland-Altman plots.
//!
//! The numerical code in [`stats`] and [`evaluation`] is generic over
//! [`Scalar`]; the aliases below fix it to `f64`, which is what the pipeline
//! uses end to end.

pub mod evaluation;
pub mod inference;
pub mod nutrients;
pub mod prompt;
pub mod recall;
pub mod scalar;
pub mod stats;
pub mod synthetic;

pub use nutrients::{format_decimal, round2, Nutrient, PerNutrient};
pub use scalar::Scalar;

/// Energy and five macronutrients in `f64`.
pub type NutrientVector = PerNutrient<f64>;
pub type NutrientVector32 = PerNutrient<f32>;

/// Per-nutrient validation statistics in `f64`.
pub type MetricSet = evaluation::Metrics<f64>;
pub type MetricSet32 = evaluation::Metrics<f32>;

pub type NutrientMetrics = evaluation::NutrientMetrics<f64>;

/// Bland-Altman agreement data in `f64`.
pub type BlandAltmanSummary = evaluation::BlandAltman<f64>;
pub type BlandAltmanSummary32 = evaluation::BlandAltman<f32>;

pub type ParsedPrediction = evaluation::Prediction<f64>;
