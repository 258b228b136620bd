//! The kernel density estimator f_{n,K}, its distribution function F_{n,K},
//! exact expectations under a known model, and deviation norms.
//!
//! f_{n,K}(x) = (1/(n h)) Σ_i K((X_i − x)/h)
//! F_{n,K}(x) = (1/n) Σ_i G_K((x − X_i)/h)
//!
//! Expectations are computed by quadrature against the model's marginal:
//! E f_{n,K}(x) = ∫ K(u) f(x + h u) du and E F_{n,K}(x) = ∫ K(u) F(x − h u) du,
//! the latter being P(X + hU ≤ x) for U ~ K.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::kernels::KernelSpec;
use crate::processes::ProcessModel;
use crate::quadrature;

/// Absolute tolerance for expectation quadratures.
pub const EXPECTATION_TOLERANCE: f64 = 1e-10;

/// Relative floor below which a bandwidth is considered degenerate.
pub const MIN_RELATIVE_BANDWIDTH: f64 = 1e-12;

/// Densities (and CDF distances from 0 and 1) below this are treated as zero.
pub const POSITIVITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub m: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "grid requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        if m < 2 {
            return Err(Error::invalid(format!("grid requires at least 2 points, got {m}")));
        }
        Ok(Grid { lo, hi, m })
    }

    /// Symmetric grid [−half_width, half_width] whose spacing does not exceed `spacing`.
    pub fn symmetric_with_spacing(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && half_width > 0.0) {
            return Err(Error::invalid("grid spacing and half width must be positive"));
        }
        let m = (2.0 * half_width / spacing).ceil() as usize + 1;
        Grid::new(-half_width, half_width, m)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        if j + 1 == self.m {
            self.hi
        } else {
            self.lo + j as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.point(j)).collect()
    }

    /// Grid with every interval halved (2m − 1 points).
    pub fn refined(&self) -> Grid {
        Grid {
            m: 2 * self.m - 1,
            ..*self
        }
    }

    pub fn shifted(&self, s: f64) -> Grid {
        Grid {
            lo: self.lo + s,
            hi: self.hi + s,
            m: self.m,
        }
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.lo <= lo && hi <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Density,
    Cdf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateCurve {
    grid: Grid,
    values: Vec<f64>,
    kind: CurveKind,
}

impl EstimateCurve {
    pub fn new(grid: Grid, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        if values.len() != grid.m {
            return Err(Error::invalid(format!(
                "curve has {} values for a grid of {} points",
                values.len(),
                grid.m
            )));
        }
        Ok(EstimateCurve { grid, values, kind })
    }

    /// Curve of `g(x)` sampled on the grid.
    pub fn from_fn(grid: Grid, kind: CurveKind, g: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(g).collect();
        EstimateCurve { grid, values, kind }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Trapezoid rule over the whole grid.
    pub fn integral(&self) -> f64 {
        let d = self.grid.spacing();
        let v = &self.values;
        let inner: f64 = v[1..v.len() - 1].iter().sum();
        d * (inner + 0.5 * (v[0] + v[v.len() - 1]))
    }

    /// Running trapezoid integral from the left end, one value per grid point.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let d = self.grid.spacing();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * d * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// CSV with header `x,value`, 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "x,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", fmt_f64(self.grid.point(j)), fmt_f64(*v))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Exact summation; only the terms inside the kernel support are visited.
    Direct,
    /// Linear binning onto the grid followed by a discrete convolution.
    Binned,
}

fn validate_inputs(sample: &[f64], h: f64) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::invalid("sample must be nonempty"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in sample {
        if !x.is_finite() {
            return Err(Error::invalid("sample contains a non-finite value"));
        }
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let range = hi - lo;
    if range > 0.0 && h < MIN_RELATIVE_BANDWIDTH * range {
        return Err(Error::invalid(format!(
            "bandwidth {h:e} is degenerate relative to the data range {range:e}"
        )));
    }
    Ok((lo, hi))
}

fn sorted_copy(sample: &[f64]) -> Vec<f64> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// f_{n,K}(x) by plain summation in sample order (no validation).
pub fn density_at(sample: &[f64], kernel: &KernelSpec, h: f64, x: f64) -> f64 {
    let s: f64 = sample.iter().map(|&xi| kernel.evaluate((xi - x) / h)).sum();
    s / (sample.len() as f64 * h)
}

/// F_{n,K}(x) by plain summation in sample order (no validation).
pub fn cdf_at(sample: &[f64], kernel: &KernelSpec, h: f64, x: f64) -> f64 {
    let s: f64 = sample.iter().map(|&xi| kernel.cdf((x - xi) / h)).sum();
    s / sample.len() as f64
}

/// Density estimate on a sorted sample, visiting only the support window.
fn density_sorted_window(sorted: &[f64], kernel: &KernelSpec, h: f64, x: f64) -> f64 {
    let r = kernel.support_radius * h;
    let start = sorted.partition_point(|&v| v < x - r);
    let mut s = 0.0;
    for &xi in &sorted[start..] {
        if xi > x + r {
            break;
        }
        s += kernel.evaluate((xi - x) / h);
    }
    s / (sorted.len() as f64 * h)
}

/// f_{n,K} on `grid` for a sample that is already sorted ascending.
///
/// Compact kernels only visit the support window of each grid point, which
/// gives the same terms as [`density_at`] summed in sorted order.
pub fn density_on_sorted(sorted: &[f64], kernel: &KernelSpec, h: f64, grid: &Grid) -> Vec<f64> {
    if kernel.is_compact() {
        (0..grid.m)
            .map(|j| density_sorted_window(sorted, kernel, h, grid.point(j)))
            .collect()
    } else {
        (0..grid.m)
            .map(|j| density_at(sorted, kernel, h, grid.point(j)))
            .collect()
    }
}

/// Worst-case per-point error of [`Strategy::Binned`] relative to
/// [`Strategy::Direct`]: L_K·Δ/(2h²) from the linear interpolation error of a
/// Lipschitz kernel, plus K(R)/h for the truncated Gaussian tail.
/// `None` for kernels that are not Lipschitz.
pub fn binning_error_bound(kernel: &KernelSpec, h: f64, spacing: f64) -> Option<f64> {
    let lip = kernel.lipschitz_const?;
    let tail = if kernel.is_compact() {
        0.0
    } else {
        kernel.evaluate(kernel.effective_radius()) / h
    };
    Some(lip * spacing / (2.0 * h * h) + tail)
}

fn binned_density(sample: &[f64], kernel: &KernelSpec, h: f64, grid: &Grid) -> Vec<f64> {
    let m = grid.m;
    let delta = grid.spacing();
    let mut counts = vec![0.0; m];
    for &x in sample {
        let t = (x - grid.lo) / delta;
        let j = (t.floor() as usize).min(m - 1);
        let frac = t - j as f64;
        if j + 1 < m {
            counts[j] += 1.0 - frac;
            counts[j + 1] += frac;
        } else {
            counts[j] += 1.0;
        }
    }
    let reach = ((kernel.effective_radius() * h / delta).floor() as usize).min(m - 1);
    let weights: Vec<f64> = (0..=reach).map(|i| kernel.evaluate(i as f64 * delta / h)).collect();
    let norm = 1.0 / (sample.len() as f64 * h);
    (0..m)
        .map(|j| {
            let lo = j.saturating_sub(reach);
            let hi = (j + reach).min(m - 1);
            let mut s = 0.0;
            for (i, c) in counts.iter().enumerate().take(hi + 1).skip(lo) {
                s += c * weights[i.abs_diff(j)];
            }
            s * norm
        })
        .collect()
}

pub fn density_estimate(
    sample: &[f64],
    kernel: &KernelSpec,
    h: f64,
    grid: &Grid,
    strategy: Strategy,
) -> Result<EstimateCurve> {
    let (lo, hi) = validate_inputs(sample, h)?;
    let values = match strategy {
        Strategy::Direct => density_on_sorted(&sorted_copy(sample), kernel, h, grid),
        Strategy::Binned => {
            let r = kernel.effective_radius() * h;
            if !grid.covers(lo - r, hi + r) {
                return Err(Error::invalid(format!(
                    "binned estimate needs a grid covering [{}, {}] (data ± R·h), grid is [{}, {}]",
                    lo - r,
                    hi + r,
                    grid.lo,
                    grid.hi
                )));
            }
            binned_density(sample, kernel, h, grid)
        }
    };
    EstimateCurve::new(*grid, values, CurveKind::Density)
}

/// F_{n,K} on `grid` for a sorted sample: points left of the window add 1,
/// points right of it add 0, the rest go through G_K.
pub fn cdf_on_sorted(sorted: &[f64], kernel: &KernelSpec, h: f64, grid: &Grid) -> Vec<f64> {
    let n = sorted.len() as f64;
    if !kernel.is_compact() {
        return (0..grid.m).map(|j| cdf_at(sorted, kernel, h, grid.point(j))).collect();
    }
    let r = kernel.support_radius * h;
    (0..grid.m)
        .map(|j| {
            let x = grid.point(j);
            let start = sorted.partition_point(|&v| v < x - r);
            let mut s = start as f64;
            for &xi in &sorted[start..] {
                if xi > x + r {
                    break;
                }
                s += kernel.cdf((x - xi) / h);
            }
            s / n
        })
        .collect()
}

pub fn cdf_estimate(sample: &[f64], kernel: &KernelSpec, h: f64, grid: &Grid) -> Result<EstimateCurve> {
    validate_inputs(sample, h)?;
    if !(kernel.is_symmetric && kernel.integrates_to_one) {
        return Err(Error::invalid(
            "CDF estimator requires a symmetric kernel with unit mass",
        ));
    }
    let values = cdf_on_sorted(&sorted_copy(sample), kernel, h, grid);
    EstimateCurve::new(*grid, values, CurveKind::Cdf)
}

fn integrate_against_kernel(kernel: &KernelSpec, g: impl Fn(f64) -> f64) -> Result<f64> {
    let r = kernel.effective_radius();
    let q = quadrature::integrate(
        |u| kernel.evaluate(u) * g(u),
        -r,
        r,
        kernel.kinks(),
        EXPECTATION_TOLERANCE,
        0.0,
    )?;
    Ok(q.value)
}

/// E f_{n,K}(x) = ∫ K(u) f(x + h u) du.
pub fn expected_density(model: &ProcessModel, kernel: &KernelSpec, h: f64, x: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
    }
    integrate_against_kernel(kernel, |u| model.marginal_density(x + h * u))
}

/// E F_{n,K}(x) = E G_K((x − X)/h) = ∫ K(u) F(x − h u) du.
pub fn expected_cdf(model: &ProcessModel, kernel: &KernelSpec, h: f64, x: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
    }
    if !x.is_finite() {
        return Err(Error::invalid("expected CDF needs a finite evaluation point"));
    }
    integrate_against_kernel(kernel, |u| model.marginal_cdf(x - h * u))
}

/// E f_{n,K}(x) − f(x).
pub fn bias(model: &ProcessModel, kernel: &KernelSpec, h: f64, x: f64) -> Result<f64> {
    Ok(expected_density(model, kernel, h, x)? - model.marginal_density(x))
}

/// h · sup|f′| · ∫|u K(u)| du, the first-order bias bound.
pub fn bias_bound(model: &ProcessModel, kernel: &KernelSpec, h: f64) -> f64 {
    h * model.density_derivative_sup() * kernel.abs_first_moment
}

fn check_same_grid(a: &EstimateCurve, b: &EstimateCurve) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(())
}

/// max_j |a_j − b_j|. A lower bound on the continuum sup; see
/// [`sup_discretization_bound`] for the gap.
pub fn sup_deviation(a: &EstimateCurve, b: &EstimateCurve) -> Result<f64> {
    check_same_grid(a, b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// (trapezoid ∫ |a − b|^p)^{1/p} over the grid.
pub fn lp_deviation(a: &EstimateCurve, b: &EstimateCurve, p: f64) -> Result<f64> {
    check_same_grid(a, b)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("L^p deviation needs p >= 1, got {p}")));
    }
    let d = a.grid.spacing();
    let pw: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs().powf(p))
        .collect();
    let inner: f64 = pw[1..pw.len() - 1].iter().sum();
    let integral = d * (inner + 0.5 * (pw[0] + pw[pw.len() - 1]));
    Ok(integral.powf(1.0 / p))
}

/// Bound on sup_x |f_n − E f_n| minus its grid maximum:
/// (‖K‖₁·sup|f′| + L_K/h²) · spacing/2, the Lipschitz constant of
/// f_n − E f_n times the distance to the nearest node.
pub fn sup_discretization_bound(kernel: &KernelSpec, h: f64, density_lipschitz: f64, spacing: f64) -> Option<f64> {
    let lip = kernel.lipschitz_const?;
    Some((kernel.l1_norm * density_lipschitz + lip / (h * h)) * spacing / 2.0)
}

/// √(n h)·(f_n(x) − E f_n(x)) / √(‖K‖₂² f(x)) with the exact centering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityStandardizer {
    pub center: f64,
    pub scale: f64,
    sqrt_nh: f64,
}

impl DensityStandardizer {
    pub fn new(model: &ProcessModel, kernel: &KernelSpec, h: f64, n: usize, x: f64) -> Result<Self> {
        let fx = model.marginal_density(x);
        if fx <= POSITIVITY_TOLERANCE {
            return Err(Error::gate(format!("f(x) > 0 required, f({x}) = {fx:e}")));
        }
        Ok(DensityStandardizer {
            center: expected_density(model, kernel, h, x)?,
            scale: (kernel.l2_norm_sq * fx).sqrt(),
            sqrt_nh: (n as f64 * h).sqrt(),
        })
    }

    #[inline]
    pub fn standardize(&self, estimate: f64) -> f64 {
        self.sqrt_nh * (estimate - self.center) / self.scale
    }
}

pub fn clt_statistic(sample: &[f64], kernel: &KernelSpec, h: f64, x: f64, model: &ProcessModel) -> Result<f64> {
    validate_inputs(sample, h)?;
    let st = DensityStandardizer::new(model, kernel, h, sample.len(), x)?;
    Ok(st.standardize(density_at(sample, kernel, h, x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CdfCenter {
    /// E F_{n,K}(x), by quadrature.
    ExpectedFnK,
    /// The model's F(x).
    TrueF,
}

/// √n·(F_n(x) − center)/√(F(x)(1 − F(x))).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfStandardizer {
    pub center: f64,
    pub scale: f64,
    sqrt_n: f64,
}

impl CdfStandardizer {
    pub fn new(model: &ProcessModel, kernel: &KernelSpec, h: f64, n: usize, x: f64, center: CdfCenter) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::gate("0 < F(x) < 1 required; x must be finite"));
        }
        let f = model.marginal_cdf(x);
        if f <= POSITIVITY_TOLERANCE || f >= 1.0 - POSITIVITY_TOLERANCE {
            return Err(Error::gate(format!("0 < F(x) < 1 required, F({x}) = {f:e}")));
        }
        let c = match center {
            CdfCenter::ExpectedFnK => expected_cdf(model, kernel, h, x)?,
            CdfCenter::TrueF => f,
        };
        Ok(CdfStandardizer {
            center: c,
            scale: (f * (1.0 - f)).sqrt(),
            sqrt_n: (n as f64).sqrt(),
        })
    }

    #[inline]
    pub fn standardize(&self, estimate: f64) -> f64 {
        self.sqrt_n * (estimate - self.center) / self.scale
    }
}

pub fn cdf_clt_statistic(
    sample: &[f64],
    kernel: &KernelSpec,
    h: f64,
    x: f64,
    model: &ProcessModel,
    center: CdfCenter,
) -> Result<f64> {
    validate_inputs(sample, h)?;
    if !(kernel.is_symmetric && kernel.integrates_to_one) {
        return Err(Error::invalid(
            "CDF estimator requires a symmetric kernel with unit mass",
        ));
    }
    let st = CdfStandardizer::new(model, kernel, h, sample.len(), x, center)?;
    Ok(st.standardize(cdf_at(sample, kernel, h, x)))
}
