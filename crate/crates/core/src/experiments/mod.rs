//! Monte Carlo experiments that confront the estimator with its limit
//! theorems, plus the configuration, hypothesis gates and report formats.
//!
//! Replicate r always runs on the path seeded by `replicate_seed(base_seed, r)`,
//! and per-replicate results are collected in replicate order, so a report is
//! byte-identical for any thread count.

mod bias;
mod clt;
pub mod config;
pub mod gates;
mod moment;
mod rate;
pub mod report;
mod uniform;

use rayon::prelude::*;

pub use bias::run_bias_experiment;
pub use clt::run_clt_experiment;
pub use config::{BlockingConfig, ExperimentConfig, ExperimentKind, SupDomain};
pub use gates::{enforce_gates, hypotheses, GateStatus, Hypothesis};
pub use moment::run_moment_experiment;
pub use rate::{integral_tail_bound, run_rate_experiment};
pub use report::{Cell, Check, ExperimentReport, NamedTable, Table, Verdict};
pub use uniform::run_uniform_as_experiment;

use crate::error::{Error, Result};
use crate::estimator::{expected_density, Grid};
use crate::rng::replicate_seed;
use crate::stats::SlopeFit;

/// CLT verdict thresholds.
pub const CLT_KS_THRESHOLD: f64 = 0.05;
pub const CLT_VARIANCE_TOLERANCE: f64 = 0.1;
/// Allowed |fitted slope − predicted slope| for the moment rates.
pub const RATE_SLOPE_TOLERANCE: f64 = 0.1;
/// Uniform-rate verdict: max ratio ≤ 3·median, |trend slope| ≤ 0.05, ≥ 95% of paths.
pub const UNIFORM_MAX_OVER_MEDIAN: f64 = 3.0;
pub const UNIFORM_TREND_TOLERANCE: f64 = 0.05;
pub const UNIFORM_PASS_FRACTION: f64 = 0.95;
/// Bias verdict: fitted slope of sup_x |bias| against h.
pub const BIAS_MIN_SLOPE: f64 = 0.9;
/// Moment bound verdict: spread of the ratio across levels.
pub const MOMENT_MAX_SPREAD: f64 = 50.0;
/// Half width, in marginal sds, of the grid standing in for the whole line.
pub const WHOLE_LINE_SDS: f64 = 8.0;

/// Dispatch on the configured kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        k if k.is_clt() => run_clt_experiment(cfg),
        k if k.is_rate() => run_rate_experiment(cfg),
        ExperimentKind::RateUniformAs => run_uniform_as_experiment(cfg),
        ExperimentKind::Bias => run_bias_experiment(cfg),
        _ => run_moment_experiment(cfg),
    }
}

pub(crate) fn expect_kind(cfg: &ExperimentConfig, ok: bool, runner: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("{runner} cannot run a {} experiment", cfg.kind)))
    }
}

/// Runs `f` on every replicate path of length `len`, in parallel, returning
/// results in replicate order.
pub(crate) fn par_replicates<T, F>(cfg: &ExperimentConfig, count: usize, len: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &[f64]) -> Result<T> + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map(|r| {
            let path = cfg.model.generate_path(len, replicate_seed(cfg.base_seed, r))?;
            f(r, path.values())
        })
        .collect()
}

/// E f_{n,K} at every grid point.
pub(crate) fn expected_on_grid(cfg: &ExperimentConfig, h: f64, grid: &Grid) -> Result<Vec<f64>> {
    (0..grid.m)
        .into_par_iter()
        .map(|j| expected_density(&cfg.model, &cfg.kernel, h, grid.point(j)))
        .collect()
}

/// [−8s, 8s] at the configured grid spacing.
pub(crate) fn whole_line_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    Grid::symmetric_with_spacing(WHOLE_LINE_SDS * cfg.model.marginal_sd(), cfg.grid.spacing())
}

pub(crate) fn fitted_plot(xs: &[f64], ys: &[f64], fit: &SlopeFit, cols: [&str; 3]) -> Table {
    let mut t = Table::new(&cols);
    for (x, y) in xs.iter().zip(ys) {
        let lx = x.ln();
        t.push(vec![Cell::from(lx), Cell::from(y.ln()), Cell::from(fit.predict(lx))]);
    }
    t
}
