//! Stationary Gaussian sequences with closed-form marginals and known
//! ρ-mixing decay.
//!
//! Built-in families:
//! - `Iid`: X_t = σ ε_t.
//! - `Ar1 { phi }`: X_t = φ X_{t−1} + σ ε_t, started from the exact
//!   stationary law X_0 = σ/√(1−φ²) · ε_0 (no burn-in).
//! - `Ma { weights }`: X_t = σ Σ_j w_j ε_{t−j}, j = 0…q, with the q
//!   pre-sample innovations drawn first.
//!
//! The ε_t are standard normals from [`Stream`], one uniform per innovation,
//! so every path is a prefix of any longer path with the same seed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::special::{std_normal_cdf, FRAC_1_SQRT_2PI};

/// Number of dyadic lags summed when the mixing series is evaluated.
pub const MIXING_SERIES_TERMS: u32 = 41;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessFamily {
    Iid,
    Ar1 { phi: f64 },
    Ma { weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessModel {
    #[serde(flatten)]
    family: ProcessFamily,
    innovation_sd: f64,
    marginal_sd: f64,
}

impl ProcessModel {
    pub fn new(family: ProcessFamily, innovation_sd: f64) -> Result<Self> {
        if !(innovation_sd.is_finite() && innovation_sd > 0.0) {
            return Err(Error::invalid(format!(
                "innovation_sd must be positive, got {innovation_sd}"
            )));
        }
        let marginal_sd = match &family {
            ProcessFamily::Iid => innovation_sd,
            ProcessFamily::Ar1 { phi } => {
                if !(phi.is_finite() && phi.abs() < 1.0) {
                    return Err(Error::invalid(format!(
                        "AR(1) requires |phi| < 1 for stationarity, got {phi}"
                    )));
                }
                innovation_sd / (1.0 - phi * phi).sqrt()
            }
            ProcessFamily::Ma { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::invalid("MA weights must be a nonempty list of finite numbers"));
                }
                let ss: f64 = weights.iter().map(|w| w * w).sum();
                if ss == 0.0 {
                    return Err(Error::invalid("MA weights must not all be zero"));
                }
                innovation_sd * ss.sqrt()
            }
        };
        Ok(ProcessModel {
            family,
            innovation_sd,
            marginal_sd,
        })
    }

    pub fn iid(sd: f64) -> Result<Self> {
        Self::new(ProcessFamily::Iid, sd)
    }

    pub fn ar1(phi: f64, innovation_sd: f64) -> Result<Self> {
        Self::new(ProcessFamily::Ar1 { phi }, innovation_sd)
    }

    pub fn ma(weights: Vec<f64>, innovation_sd: f64) -> Result<Self> {
        Self::new(ProcessFamily::Ma { weights }, innovation_sd)
    }

    pub fn family(&self) -> &ProcessFamily {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            ProcessFamily::Iid => "iid",
            ProcessFamily::Ar1 { .. } => "ar1",
            ProcessFamily::Ma { .. } => "ma",
        }
    }

    pub fn marginal_mean(&self) -> f64 {
        0.0
    }

    pub fn marginal_sd(&self) -> f64 {
        self.marginal_sd
    }

    pub fn innovation_sd(&self) -> f64 {
        self.innovation_sd
    }

    /// Markov in the sense needed by [`ProcessModel::conditional_mean`].
    pub fn is_markov(&self) -> bool {
        !matches!(self.family, ProcessFamily::Ma { .. })
    }

    pub fn marginal_density(&self, x: f64) -> f64 {
        let s = self.marginal_sd;
        let z = (x - self.marginal_mean()) / s;
        FRAC_1_SQRT_2PI / s * (-0.5 * z * z).exp()
    }

    pub fn marginal_cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.marginal_mean()) / self.marginal_sd)
    }

    /// sup |f′| of the marginal density, attained at mean ± sd.
    pub fn density_derivative_sup(&self) -> f64 {
        let s = self.marginal_sd;
        FRAC_1_SQRT_2PI * (-0.5f64).exp() / (s * s)
    }

    /// sup f of the marginal density.
    pub fn density_sup(&self) -> f64 {
        FRAC_1_SQRT_2PI / self.marginal_sd
    }

    /// Autocorrelation at `lag`.
    pub fn autocorrelation(&self, lag: u64) -> f64 {
        match &self.family {
            ProcessFamily::Iid => {
                if lag == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            ProcessFamily::Ar1 { phi } => phi.powf(lag as f64),
            ProcessFamily::Ma { weights } => {
                let q = weights.len() as u64 - 1;
                if lag > q {
                    return 0.0;
                }
                let l = lag as usize;
                let gamma: f64 = weights.iter().zip(&weights[l..]).map(|(a, b)| a * b).sum();
                let gamma0: f64 = weights.iter().map(|w| w * w).sum();
                gamma / gamma0
            }
        }
    }

    /// ρ-mixing coefficient ρ(lag).
    ///
    /// For jointly Gaussian sequences this is the maximal correlation between
    /// the past and the future. AR(1): |φ|^lag; i.i.d.: 0; MA(q): 0 beyond q.
    /// For MA(q) and `lag ≤ q` the value returned is `max_{j ≥ lag} |corr(j)|`,
    /// which is attained by a pair of single coordinates and therefore bounds
    /// the maximal correlation from below; gates that need an upper bound do
    /// not rely on it.
    pub fn rho_mixing_coefficient(&self, lag: u64) -> Result<f64> {
        if lag == 0 {
            return Err(Error::invalid("rho-mixing coefficient is defined for lag >= 1"));
        }
        Ok(match &self.family {
            ProcessFamily::Iid => 0.0,
            ProcessFamily::Ar1 { phi } => phi.abs().powf(lag as f64),
            ProcessFamily::Ma { weights } => {
                let q = weights.len() as u64 - 1;
                (lag..=q).map(|j| self.autocorrelation(j).abs()).fold(0.0, f64::max)
            }
        })
    }

    /// Whether ρ(lag) is certified exactly (as opposed to a lower bound).
    pub fn rho_is_exact(&self, lag: u64) -> bool {
        match &self.family {
            ProcessFamily::Ma { weights } => lag > weights.len() as u64 - 1,
            _ => true,
        }
    }

    /// Partial sum Σ_{i=0}^{40} ρ(2^i)^power.
    ///
    /// Every built-in family decays geometrically or is m-dependent, so the
    /// full series converges; the tail beyond i = 40 is below 1e-12 unless
    /// |φ| > 1 − 2^{-35}.
    pub fn mixing_series(&self, power: f64) -> f64 {
        (0..MIXING_SERIES_TERMS)
            .map(|i| {
                let lag = 1u64 << i;
                self.rho_mixing_coefficient(lag).expect("lag >= 1").powf(power)
            })
            .sum()
    }

    /// Σ_i ρ^power(2^i) < ∞ holds for every built-in family and power > 0.
    pub fn mixing_series_converges(&self, power: f64) -> bool {
        power > 0.0
    }

    /// E(X_{t+horizon} | X_t = last_value) for Markov families.
    pub fn conditional_mean(&self, last_value: f64, horizon: u64) -> Result<f64> {
        if horizon == 0 {
            return Err(Error::invalid("conditional mean horizon must be >= 1"));
        }
        match &self.family {
            ProcessFamily::Iid => Ok(0.0),
            ProcessFamily::Ar1 { phi } => Ok(phi.powf(horizon as f64) * last_value),
            ProcessFamily::Ma { .. } => Err(Error::invalid(
                "conditional mean given a single past value is only available for Markov models (iid, ar1)",
            )),
        }
    }

    pub fn generate_path(&self, n: usize, seed: u64) -> Result<SamplePath> {
        if n == 0 {
            return Err(Error::invalid("sample path length must be >= 1"));
        }
        let mut stream = Stream::new(seed);
        let sigma = self.innovation_sd;
        let mut values = Vec::with_capacity(n);
        match &self.family {
            ProcessFamily::Iid => {
                values.extend((0..n).map(|_| sigma * stream.standard_normal()));
            }
            ProcessFamily::Ar1 { phi } => {
                let mut x = self.marginal_sd * stream.standard_normal();
                values.push(x);
                for _ in 1..n {
                    x = phi * x + sigma * stream.standard_normal();
                    values.push(x);
                }
            }
            ProcessFamily::Ma { weights } => {
                let q = weights.len() - 1;
                // Ring buffer of the last q+1 innovations, newest at `head`.
                let mut eps = vec![0.0; q + 1];
                for e in eps.iter_mut().take(q) {
                    *e = stream.standard_normal();
                }
                let mut head = q;
                for _ in 0..n {
                    eps[head] = stream.standard_normal();
                    let mut x = 0.0;
                    for (j, w) in weights.iter().enumerate() {
                        x += w * eps[(head + q + 1 - j) % (q + 1)];
                    }
                    values.push(sigma * x);
                    head = (head + 1) % (q + 1);
                }
            }
        }
        Ok(SamplePath {
            values,
            model: self.clone(),
            seed,
        })
    }
}

/// One realization X_0, …, X_{n−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub values: Vec<f64>,
    pub model: ProcessModel,
    pub seed: u64,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl std::ops::Deref for SamplePath {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_seed;

    fn lag_autocorrelation(x: &[f64], lag: usize) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        let cov: f64 = (0..n - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum();
        cov / var
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(ProcessModel::ar1(1.0, 1.0).is_err());
        assert!(ProcessModel::ar1(-1.2, 1.0).is_err());
        assert!(ProcessModel::ma(vec![0.0, 0.0], 1.0).is_err());
        assert!(ProcessModel::ma(vec![], 1.0).is_err());
        assert!(ProcessModel::iid(0.0).is_err());
        assert!(ProcessModel::iid(1.0).unwrap().generate_path(0, 1).is_err());
    }

    #[test]
    fn marginal_sd_matches_parameters() {
        let m = ProcessModel::ar1(0.6, 1.0).unwrap();
        assert!((m.marginal_sd() - 1.25).abs() < 1e-12);
        let ma = ProcessModel::ma(vec![1.0, 0.5], 2.0).unwrap();
        assert!((ma.marginal_sd() - 2.0 * 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn iid_mean_is_near_zero() {
        let m = ProcessModel::iid(1.0).unwrap();
        let n = 100_000;
        let p = m.generate_path(n, 12345).unwrap();
        let mean = p.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn ar1_lag1_autocorrelation() {
        let m = ProcessModel::ar1(0.5, 1.0).unwrap();
        let p = m.generate_path(100_000, 2024).unwrap();
        let r1 = lag_autocorrelation(&p, 1);
        assert!((r1 - 0.5).abs() < 0.02, "r1 = {r1}");
        for k in 2..=5 {
            let rk = lag_autocorrelation(&p, k);
            // sd of the lag-k estimate is about sqrt((1+φ²)/(1−φ²)/n) ≈ 0.0041
            assert!((rk - 0.5f64.powi(k as i32)).abs() < 0.02, "lag {k}: {rk}");
        }
    }

    #[test]
    fn ar1_with_zero_phi_is_iid() {
        let a = ProcessModel::ar1(0.0, 1.0).unwrap().generate_path(1000, 5).unwrap();
        let b = ProcessModel::iid(1.0).unwrap().generate_path(1000, 5).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn paths_are_reproducible_and_prefix_closed() {
        for model in [
            ProcessModel::iid(1.0).unwrap(),
            ProcessModel::ar1(-0.3, 0.7).unwrap(),
            ProcessModel::ma(vec![1.0, -0.4, 0.2], 1.0).unwrap(),
        ] {
            let a = model.generate_path(500, 77).unwrap();
            let b = model.generate_path(500, 77).unwrap();
            let long = model.generate_path(1000, 77).unwrap();
            assert_eq!(a.values, b.values);
            assert_eq!(&long.values[..500], &a.values[..]);
        }
    }

    #[test]
    fn ma_path_matches_definition() {
        let w = vec![1.0, 0.5, -0.25];
        let model = ProcessModel::ma(w.clone(), 1.5).unwrap();
        let p = model.generate_path(50, 3).unwrap();
        let mut s = Stream::new(3);
        let eps: Vec<f64> = (0..52).map(|_| s.standard_normal()).collect();
        for t in 0..50 {
            let x = 1.5 * (w[0] * eps[t + 2] + w[1] * eps[t + 1] + w[2] * eps[t]);
            assert!((p[t] - x).abs() < 1e-14);
        }
    }

    #[test]
    fn density_and_cdf_values() {
        let m = ProcessModel::ar1(0.6, 1.0).unwrap();
        assert!((m.marginal_density(0.0) - 0.8 * 0.398_942_280_401_432_7).abs() < 1e-15);
        let z = ProcessModel::iid(1.0).unwrap();
        assert!((z.marginal_cdf(1.0) - 0.841_345).abs() < 1e-6);
        assert_eq!(z.marginal_cdf(0.0), 0.5);
        assert!(z.marginal_cdf(-40.0) < 1e-300);
        assert!((z.marginal_density(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn marginal_cdf_matches_empirical_cdf() {
        let m = ProcessModel::iid(1.0).unwrap();
        let mut x = m.generate_path(100_000, 9).unwrap().values;
        x.sort_by(f64::total_cmp);
        let n = x.len() as f64;
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = m.marginal_cdf(v);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.63 / n.sqrt(), "KS = {d}");
    }

    #[test]
    fn rho_values() {
        let iid = ProcessModel::iid(1.0).unwrap();
        assert_eq!(iid.rho_mixing_coefficient(5).unwrap(), 0.0);
        let ar = ProcessModel::ar1(0.5, 1.0).unwrap();
        assert!((ar.rho_mixing_coefficient(3).unwrap() - 0.125).abs() < 1e-15);
        assert!(ar.rho_mixing_coefficient(0).is_err());
        let ma = ProcessModel::ma(vec![1.0, 0.8], 1.0).unwrap();
        assert_eq!(ma.rho_mixing_coefficient(2).unwrap(), 0.0);
        assert!((ma.rho_mixing_coefficient(1).unwrap() - 0.8 / 1.64).abs() < 1e-15);
        assert!(!ma.rho_is_exact(1) && ma.rho_is_exact(2));
    }

    #[test]
    fn rho_nonincreasing_and_series_converges() {
        for model in [
            ProcessModel::iid(1.0).unwrap(),
            ProcessModel::ar1(0.9, 1.0).unwrap(),
            ProcessModel::ar1(-0.5, 1.0).unwrap(),
            ProcessModel::ma(vec![1.0, 0.2, 0.9, -0.3], 1.0).unwrap(),
        ] {
            let mut prev = f64::INFINITY;
            for lag in 1..200 {
                let r = model.rho_mixing_coefficient(lag).unwrap();
                assert!(r <= prev);
                prev = r;
            }
            let tail = model.rho_mixing_coefficient(1 << 40).unwrap();
            assert!(tail < 1e-12);
            assert!(model.mixing_series(1.0).is_finite());
        }
    }

    #[test]
    fn conditional_mean_closed_form() {
        let iid = ProcessModel::iid(1.0).unwrap();
        assert_eq!(iid.conditional_mean(3.0, 4).unwrap(), 0.0);
        let ar = ProcessModel::ar1(0.5, 1.0).unwrap();
        assert!((ar.conditional_mean(2.0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(ProcessModel::ma(vec![1.0, 1.0], 1.0)
            .unwrap()
            .conditional_mean(1.0, 1)
            .is_err());
        assert!(ar.conditional_mean(1.0, 0).is_err());
    }

    #[test]
    fn conditional_mean_monte_carlo() {
        // X_{t+1} = 0.7·1.0 + ε: average over 1e5 continuations.
        let phi = 0.7;
        let reps = 100_000u64;
        let total: f64 = (0..reps)
            .map(|r| {
                let mut s = Stream::new(replicate_seed(11, r));
                phi * 1.0 + s.standard_normal()
            })
            .sum();
        let m = ProcessModel::ar1(phi, 1.0).unwrap();
        assert!((total / reps as f64 - m.conditional_mean(1.0, 1).unwrap()).abs() < 0.013);
    }
}
