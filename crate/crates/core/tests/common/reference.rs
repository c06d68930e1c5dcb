//! Straightforward reference statistics, kept apart from the library code
//! they check. Everything is a plain loop in `f64`; the t-distribution tail
//! comes from `statrs`.

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy)]
pub struct Reference {
    pub mse: f64,
    pub mae: f64,
    pub mape: Option<f64>,
    pub rmse: f64,
    pub r2: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub ccc: f64,
    pub pearson: f64,
}

pub fn reference(truth: &[f64], pred: &[f64]) -> Reference {
    let n = truth.len() as f64;

    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut pct = 0.0;
    let mut pct_n = 0usize;
    for i in 0..truth.len() {
        let e = pred[i] - truth[i];
        sq += e * e;
        abs += e.abs();
        if truth[i] > 0.0 {
            pct += e.abs() / truth[i];
            pct_n += 1;
        }
    }
    let mse = sq / n;

    let mut t_sum = 0.0;
    let mut p_sum = 0.0;
    for i in 0..truth.len() {
        t_sum += truth[i];
        p_sum += pred[i];
    }
    let t_mean = t_sum / n;
    let p_mean = p_sum / n;

    let mut ss_tot = 0.0;
    let mut s_tt = 0.0;
    let mut s_pp = 0.0;
    let mut s_tp = 0.0;
    for i in 0..truth.len() {
        let dt = truth[i] - t_mean;
        let dp = pred[i] - p_mean;
        ss_tot += dt * dt;
        s_tt += dt * dt;
        s_pp += dp * dp;
        s_tp += dt * dp;
    }
    let var_t = s_tt / n;
    let var_p = s_pp / n;
    let cov = s_tp / n;
    let ccc = 2.0 * cov / (var_t + var_p + (p_mean - t_mean) * (p_mean - t_mean));
    let pearson = s_tp / (s_tt * s_pp).sqrt();

    let mut d_sum = 0.0;
    for i in 0..truth.len() {
        d_sum += pred[i] - truth[i];
    }
    let d_mean = d_sum / n;
    let mut d_ss = 0.0;
    for i in 0..truth.len() {
        let x = pred[i] - truth[i] - d_mean;
        d_ss += x * x;
    }
    let d_sd = (d_ss / (n - 1.0)).sqrt();
    let t_stat = d_mean / (d_sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    let p_value = 2.0 * dist.cdf(-t_stat.abs());

    Reference {
        mse,
        mae: abs / n,
        mape: (pct_n > 0).then(|| pct / pct_n as f64),
        rmse: mse.sqrt(),
        r2: 1.0 - sq / ss_tot,
        t_stat,
        p_value,
        ccc,
        pearson,
    }
}

/// `|a - b| <= tol` absolute or relative, whichever is larger.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
