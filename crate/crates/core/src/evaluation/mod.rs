//! Reply parsing, validation statistics, Bland-Altman analysis and reports.

mod metrics;
mod parse;
mod report;
mod score;
mod svg;

pub use metrics::{
    bland_altman, compute_metrics, nutrient_metrics, AgreementLimits, BlandAltman, Metrics, MetricsError,
    NutrientMetrics, LOA_MULTIPLIER,
};
pub use parse::{parse_prediction, InvalidReason, ParseMode, Prediction, PredictionOutcome};
pub use report::{
    format_p_value, metrics_json, metrics_table, write_report, ReportError, ReportFiles, METRICS_JSON_FILE,
    METRICS_TEXT_FILE,
};
pub use score::{
    score_results, score_run, Exclusion, ExclusionReport, ScoreError, ScoreOptions, ScoreOutcome,
    MIN_EFFECTIVE_FRACTION,
};
pub use svg::{
    plot_file_name, render_agreement_svg, render_bland_altman_svg, LIMIT_DASHARRAY, LIMIT_LINE_COLOR, MEAN_LINE_COLOR,
};
