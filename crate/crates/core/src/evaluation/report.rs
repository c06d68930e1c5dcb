//! Metric reports: `metrics.json`, an aligned text table and one SVG per
//! nutrient, written next to the run they describe.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use super::{plot_file_name, render_bland_altman_svg, ParseMode, ScoreOutcome, LOA_MULTIPLIER, MIN_EFFECTIVE_FRACTION};
use crate::inference::EXCLUSIONS_FILE;
use crate::{Nutrient, NutrientMetrics};

pub const METRICS_JSON_FILE: &str = "metrics.json";
pub const METRICS_TEXT_FILE: &str = "metrics.txt";

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct ReportError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub metrics_json: PathBuf,
    pub metrics_text: PathBuf,
    pub exclusions: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// `<0.001` below one in a thousand, three decimals otherwise.
pub fn format_p_value(p: f64) -> String {
    if p < 0.001 {
        "<0.001".to_owned()
    } else {
        format!("{p:.3}")
    }
}

fn conventions(mode: ParseMode) -> Value {
    json!({
        "r2": "coefficient of determination 1 - SS_res/SS_tot",
        "ccc": "Lin's estimator with population (divide-by-n) moments",
        "mape": "fraction, mean of |p - t| / t over pairs with t > 0; zero-truth pairs excluded and counted",
        "t_test": "paired two-sided, d = prediction - truth, df = n - 1",
        "bland_altman": format!("d = prediction - truth, sample SD, limits mean +/- {LOA_MULTIPLIER} SD"),
        "parse_mode": mode,
        "min_effective_fraction": MIN_EFFECTIVE_FRACTION,
    })
}

/// The JSON report body.
pub fn metrics_json(outcome: &ScoreOutcome, mode: ParseMode) -> Value {
    let ex = &outcome.exclusions;
    let agreement = outcome.bland_altman.as_ref().map(|ba| {
        Nutrient::ALL
            .iter()
            .map(|&n| {
                let l = ba.get(n);
                (
                    n.key().to_owned(),
                    json!({"mean_diff": l.mean_diff, "sd_diff": l.sd_diff, "loa_low": l.loa_low, "loa_high": l.loa_high}),
                )
            })
            .collect::<serde_json::Map<_, _>>()
    });
    json!({
        "conventions": conventions(mode),
        "effective_n": outcome.metrics.effective_n,
        "excluded_n": outcome.metrics.excluded_n,
        "metrics": Nutrient::ALL
            .iter()
            .map(|&n| (n.key().to_owned(), serde_json::to_value(outcome.metrics.get(n)).expect("metrics serialize")))
            .collect::<serde_json::Map<_, _>>(),
        "bland_altman": agreement,
        "exclusions": {
            "total": ex.total,
            "effective_n": ex.effective_n,
            "excluded_n": ex.excluded_n,
            "by_reason": ex.by_reason,
            "backend_failures": ex.backend_failures,
            "effective_fraction": ex.effective_fraction,
            "warning": ex.warning,
        },
    })
}

/// Rows are the statistics, columns the six outcomes.
pub fn metrics_table(outcome: &ScoreOutcome) -> String {
    type Row = (&'static str, fn(&NutrientMetrics) -> String);
    let rows: [Row; 8] = [
        ("MSE", |m| format!("{:.3}", m.mse)),
        ("MAE", |m| format!("{:.3}", m.mae)),
        ("MAPE", |m| m.mape.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.3}"))),
        ("RMSE", |m| format!("{:.3}", m.rmse)),
        ("R2", |m| format!("{:.3}", m.r2)),
        ("T-test t", |m| format!("{:.3}", m.t_stat)),
        ("T-test p-value", |m| format_p_value(m.p_value)),
        ("Lin's CCC", |m| format!("{:.3}", m.ccc)),
    ];
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut header = vec![format!("(N={})", outcome.metrics.effective_n)];
    header.extend(Nutrient::ALL.iter().map(|n| n.key().to_owned()));
    cells.push(header);
    for (label, f) in rows {
        let mut line = vec![label.to_owned()];
        line.extend(Nutrient::ALL.iter().map(|&n| f(outcome.metrics.get(n))));
        cells.push(line);
    }
    let widths: Vec<usize> =
        (0..cells[0].len()).map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();

    let mut out = String::new();
    for row in &cells {
        let mut line = format!("{:<w$}", row[0], w = widths[0]);
        for (c, cell) in row.iter().enumerate().skip(1) {
            let _ = write!(line, "  {:>w$}", cell, w = widths[c]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }

    let ex = &outcome.exclusions;
    let _ = writeln!(out);
    let _ = writeln!(out, "effective_n: {}", ex.effective_n);
    let _ = writeln!(out, "excluded_n: {}", ex.excluded_n);
    let _ = writeln!(out, "total: {}", ex.total);
    let _ = writeln!(out);
    let _ = writeln!(out, "Exclusions");
    for (reason, count) in &ex.by_reason {
        let _ = writeln!(out, "  {:<18} {}", reason.as_str(), count);
    }
    let _ = writeln!(out, "  {:<18} {}", "(backend_failure)", ex.backend_failures);
    if let Some(w) = &ex.warning {
        let _ = writeln!(out);
        let _ = writeln!(out, "WARNING: {w}");
    }
    out
}

fn write(path: PathBuf, contents: &[u8]) -> Result<PathBuf, ReportError> {
    fs::write(&path, contents).map_err(|source| ReportError { path: path.clone(), source })?;
    Ok(path)
}

/// Writes the JSON and text reports, the per-participant exclusion list and
/// (when at least two replies were valid) the six Bland-Altman plots.
pub fn write_report(dir: &Path, outcome: &ScoreOutcome, mode: ParseMode) -> Result<ReportFiles, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError { path: dir.to_owned(), source })?;
    let mut json_text = serde_json::to_string_pretty(&metrics_json(outcome, mode)).expect("report serializes");
    json_text.push('\n');
    let metrics_json = write(dir.join(METRICS_JSON_FILE), json_text.as_bytes())?;
    let metrics_text = write(dir.join(METRICS_TEXT_FILE), metrics_table(outcome).as_bytes())?;

    let mut lines = String::new();
    for e in &outcome.exclusions.excluded {
        lines.push_str(&serde_json::to_string(e).expect("exclusion serializes"));
        lines.push('\n');
    }
    let exclusions = write(dir.join(EXCLUSIONS_FILE), lines.as_bytes())?;

    let mut plots = Vec::new();
    if let Some(ba) = &outcome.bland_altman {
        for n in Nutrient::ALL {
            plots.push(write(dir.join(plot_file_name(n)), render_bland_altman_svg(ba, n).as_bytes())?);
        }
    }
    Ok(ReportFiles { metrics_json, metrics_text, exclusions, plots })
}
