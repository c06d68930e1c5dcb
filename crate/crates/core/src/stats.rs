//! Moments, correlation, and Student-t tail probabilities.
//!
//! Everything here is generic over [`Scalar`] so the same code serves `f32`
//! and `f64`. Moments are two-pass (mean first, then centered sums).

use crate::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_CF_ITERATIONS: usize = 10_000;

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    xs.iter().copied().sum::<T>() / T::from_count(xs.len())
}

/// Population (divide-by-n) variance.
pub fn population_variance<T: Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_count(xs.len())
}

/// Population (divide-by-n) covariance. Panics if lengths differ.
pub fn population_covariance<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    assert_eq!(xs.len(), ys.len(), "covariance of unequal-length samples");
    let mx = mean(xs);
    let my = mean(ys);
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .sum::<T>()
        / T::from_count(xs.len())
}

/// Sample (divide-by-(n-1)) standard deviation; `NaN` for fewer than two values.
pub fn sample_sd<T: Scalar>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::nan();
    }
    let m = mean(xs);
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>();
    (ss / T::from_count(xs.len() - 1)).sqrt()
}

/// Pearson correlation, or `None` when either sample has zero variance.
pub fn pearson_r<T: Scalar>(xs: &[T], ys: &[T]) -> Option<T> {
    let vx = population_variance(xs);
    let vy = population_variance(ys);
    if !(vx > T::zero() && vy > T::zero()) {
        return None;
    }
    Some(population_covariance(xs, ys) / (vx * vy).sqrt())
}

/// Lin's concordance correlation coefficient with population moments.
///
/// When the denominator vanishes both samples are the same constant, which
/// is perfect agreement, so the result is 1.
pub fn concordance_correlation<T: Scalar>(truth: &[T], pred: &[T]) -> T {
    let shift = mean(pred) - mean(truth);
    let denom = population_variance(pred) + population_variance(truth) + shift * shift;
    if denom == T::zero() {
        return T::one();
    }
    let two = T::lit(2.0);
    (two * population_covariance(pred, truth) / denom).max(-T::one()).min(T::one())
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x < T::lit(0.5) {
        // Reflection keeps the series in its accurate range.
        let pi = T::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    let half_ln_two_pi = T::lit(0.918_938_533_204_672_8);
    half_ln_two_pi + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta<T: Scalar>(a: T, b: T, x: T) -> T {
    regularized_incomplete_beta_xy(a, b, x, T::one() - x)
}

/// `I_x(a, b)` with `y = 1 - x` supplied separately so that callers who know
/// the complement exactly do not lose it to cancellation.
fn regularized_incomplete_beta_xy<T: Scalar>(a: T, b: T, x: T, y: T) -> T {
    if x.is_nan() || a <= T::zero() || b <= T::zero() {
        return T::nan();
    }
    if x <= T::zero() {
        return T::zero();
    }
    if y <= T::zero() {
        return T::one();
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        T::one() - front * beta_continued_fraction(b, a, y) / b
    }
}

/// Continued fraction for the incomplete beta, modified Lentz evaluation.
fn beta_continued_fraction<T: Scalar>(a: T, b: T, x: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let guard = |v: T| if v.abs() < tiny { tiny } else { v };

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one / guard(one - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_CF_ITERATIONS {
        let m = T::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one / guard(one + aa * d);
        c = guard(one + aa / c);
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one / guard(one + aa * d);
        c = guard(one + aa / c);
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom.
pub fn student_t_two_sided_p<T: Scalar>(t: T, df: T) -> T {
    if t.is_nan() || df.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return T::nan();
    }
    if t.is_infinite() {
        return T::zero();
    }
    let t2 = t * t;
    let denom = df + t2;
    let p = regularized_incomplete_beta_xy(df / T::lit(2.0), T::lit(0.5), df / denom, t2 / denom);
    p.max(T::zero()).min(T::one())
}

/// Result of a paired two-sided t-test on `pred - truth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest<T> {
    pub t_stat: T,
    pub df: usize,
    pub p_value: T,
    /// Differences had zero variance (or fewer than two pairs), so the
    /// statistic was not computed from the t distribution.
    pub degenerate: bool,
}

pub fn paired_t_test<T: Scalar>(truth: &[T], pred: &[T]) -> PairedTTest<T> {
    assert_eq!(truth.len(), pred.len(), "paired samples of unequal length");
    let diffs: Vec<T> = pred.iter().zip(truth).map(|(&p, &t)| p - t).collect();
    let n = diffs.len();
    let mean_diff = mean(&diffs);
    let sd = sample_sd(&diffs);
    if n < 2 || sd.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        let (t_stat, p_value) = if mean_diff == T::zero() || n == 0 {
            (T::zero(), T::one())
        } else {
            (mean_diff.signum() * T::infinity(), T::zero())
        };
        return PairedTTest { t_stat, df: n.saturating_sub(1), p_value, degenerate: true };
    }
    let se = sd / T::from_count(n).sqrt();
    let t_stat = mean_diff / se;
    let df = n - 1;
    PairedTTest {
        t_stat,
        df,
        p_value: student_t_two_sided_p(t_stat, T::from_count(df)),
        degenerate: false,
    }
}
