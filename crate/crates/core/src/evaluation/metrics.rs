use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{concordance_correlation, mean, paired_t_test, sample_sd};
use crate::{Nutrient, PerNutrient, Scalar};

/// Multiplier on the SD of differences for the limits of agreement.
pub const LOA_MULTIPLIER: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no prediction/truth pairs to score")]
    Empty,
    #[error("Bland-Altman analysis needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
}

/// Validation statistics for one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NutrientMetrics<T> {
    pub mse: T,
    pub mae: T,
    /// Mean of `|p - t| / t` over pairs with positive truth; `None` when
    /// every truth is zero.
    pub mape: Option<T>,
    /// Pairs left out of MAPE because their truth is zero.
    pub mape_zero_truth_excluded: usize,
    pub rmse: T,
    /// Coefficient of determination `1 - SS_res / SS_tot`.
    pub r2: T,
    pub t_stat: T,
    pub t_df: usize,
    pub p_value: T,
    pub t_test_degenerate: bool,
    pub ccc: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics<T> {
    pub per_nutrient: PerNutrient<NutrientMetrics<T>>,
    pub effective_n: usize,
    pub excluded_n: usize,
}

impl<T> Metrics<T> {
    pub fn get(&self, nutrient: Nutrient) -> &NutrientMetrics<T> {
        self.per_nutrient.get(nutrient)
    }
}

/// Statistics for one outcome over paired samples of equal, non-zero length.
pub fn nutrient_metrics<T: Scalar>(truth: &[T], pred: &[T]) -> NutrientMetrics<T> {
    assert_eq!(truth.len(), pred.len(), "unequal sample lengths");
    assert!(!truth.is_empty(), "empty samples");
    let n = T::from_count(truth.len());
    let errors: Vec<T> = pred.iter().zip(truth).map(|(&p, &t)| p - t).collect();

    let ss_res = errors.iter().map(|&e| e * e).sum::<T>();
    let mse = ss_res / n;
    let mae = errors.iter().map(|e| e.abs()).sum::<T>() / n;

    let ratios: Vec<T> = errors
        .iter()
        .zip(truth)
        .filter(|(_, &t)| t > T::zero())
        .map(|(&e, &t)| e.abs() / t)
        .collect();
    let mape = (!ratios.is_empty()).then(|| mean(&ratios));

    let truth_mean = mean(truth);
    let ss_tot = truth.iter().map(|&t| (t - truth_mean) * (t - truth_mean)).sum::<T>();
    let r2 = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else if ss_res == T::zero() {
        T::one()
    } else {
        T::zero()
    };

    let t_test = paired_t_test(truth, pred);
    NutrientMetrics {
        mse,
        mae,
        mape,
        mape_zero_truth_excluded: truth.len() - ratios.len(),
        rmse: mse.sqrt(),
        r2,
        t_stat: t_test.t_stat,
        t_df: t_test.df,
        p_value: t_test.p_value,
        t_test_degenerate: t_test.degenerate,
        ccc: concordance_correlation(truth, pred),
    }
}

fn columns<T: Scalar>(pairs: &[(PerNutrient<T>, PerNutrient<T>)], nutrient: Nutrient) -> (Vec<T>, Vec<T>) {
    pairs.iter().map(|(t, p)| (*t.get(nutrient), *p.get(nutrient))).unzip()
}

/// Per-nutrient statistics over `(truth, prediction)` pairs.
pub fn compute_metrics<T: Scalar>(pairs: &[(PerNutrient<T>, PerNutrient<T>)]) -> Result<Metrics<T>, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(Metrics {
        per_nutrient: PerNutrient::from_fn(|n| {
            let (truth, pred) = columns(pairs, n);
            nutrient_metrics(&truth, &pred)
        }),
        effective_n: pairs.len(),
        excluded_n: 0,
    })
}

/// Bias and limits of agreement for one outcome; differences are
/// prediction minus truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementLimits<T> {
    pub mean_diff: T,
    pub sd_diff: T,
    pub loa_low: T,
    pub loa_high: T,
    /// `(average, difference)` per pair.
    pub points: Vec<(T, T)>,
}

impl<T: Scalar> AgreementLimits<T> {
    pub fn from_samples(truth: &[T], pred: &[T]) -> Result<AgreementLimits<T>, MetricsError> {
        assert_eq!(truth.len(), pred.len(), "unequal sample lengths");
        if truth.len() < 2 {
            return Err(MetricsError::TooFewPairs(truth.len()));
        }
        let two = T::lit(2.0);
        let points: Vec<(T, T)> = truth.iter().zip(pred).map(|(&t, &p)| ((p + t) / two, p - t)).collect();
        let diffs: Vec<T> = points.iter().map(|&(_, d)| d).collect();
        let mean_diff = mean(&diffs);
        let sd_diff = sample_sd(&diffs);
        let half_width = T::lit(LOA_MULTIPLIER) * sd_diff;
        Ok(AgreementLimits {
            mean_diff,
            sd_diff,
            loa_low: mean_diff - half_width,
            loa_high: mean_diff + half_width,
            points,
        })
    }

    /// Fraction of points whose difference lies within the limits.
    pub fn fraction_within_limits(&self) -> f64 {
        let inside = self.points.iter().filter(|(_, d)| *d >= self.loa_low && *d <= self.loa_high).count();
        inside as f64 / self.points.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltman<T> {
    pub per_nutrient: PerNutrient<AgreementLimits<T>>,
    pub n: usize,
}

impl<T> BlandAltman<T> {
    pub fn get(&self, nutrient: Nutrient) -> &AgreementLimits<T> {
        self.per_nutrient.get(nutrient)
    }
}

pub fn bland_altman<T: Scalar>(pairs: &[(PerNutrient<T>, PerNutrient<T>)]) -> Result<BlandAltman<T>, MetricsError> {
    if pairs.len() < 2 {
        return Err(MetricsError::TooFewPairs(pairs.len()));
    }
    let mut per = Vec::with_capacity(6);
    for n in Nutrient::ALL {
        let (truth, pred) = columns(pairs, n);
        per.push(AgreementLimits::from_samples(&truth, &pred)?);
    }
    let per: [AgreementLimits<T>; 6] = per.try_into().unwrap_or_else(|_| unreachable!("six nutrients"));
    Ok(BlandAltman { per_nutrient: PerNutrient::from_array(per), n: pairs.len() })
}
