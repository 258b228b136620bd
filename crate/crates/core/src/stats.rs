//! Summary statistics, the Kolmogorov–Smirnov distance and log-log fits.
//!
//! Sums go through [`pairwise_sum`], whose reduction tree depends only on
//! the slice length, so aggregates are bit-identical however the inputs
//! were produced.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

const PAIRWISE_BLOCK: usize = 8;

/// Sum with a fixed binary reduction tree (sequential below 8 elements).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// sup_x |F_n(x) − F(x)| for the empirical CDF of `samples`.
pub fn ks_statistic(samples: &[f64], reference_cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::invalid("KS statistic needs at least 2 samples"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("KS statistic input contains NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = reference_cdf(x);
            ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    /// Half-width of the 95 % t-interval for the slope.
    pub half_width_95: f64,
}

impl SlopeFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Ordinary least squares of ln y on ln x.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("fit_loglog_slope: xs and ys differ in length"));
    }
    if xs.len() < 3 {
        return Err(Error::invalid("fit_loglog_slope: need at least 3 points"));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid(
            "fit_loglog_slope: xs and ys must be finite and positive",
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = mean(&lx);
    let my = mean(&ly);
    let sxx = pairwise_sum(&lx.iter().map(|x| (x - mx) * (x - mx)).collect::<Vec<_>>());
    if sxx <= 1e-300 {
        return Err(Error::invalid("fit_loglog_slope: xs must not all coincide"));
    }
    let sxy = pairwise_sum(&lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).collect::<Vec<_>>());
    let syy = pairwise_sum(&ly.iter().map(|y| (y - my) * (y - my)).collect::<Vec<_>>());
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = pairwise_sum(
        &lx.iter()
            .zip(&ly)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .collect::<Vec<_>>(),
    );
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let df = n - 2.0;
    let slope_stderr = (sse / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df).expect("df >= 1").inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
        half_width_95: t * slope_stderr,
    })
}
