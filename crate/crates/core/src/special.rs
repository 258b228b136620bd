//! Standard normal helpers. `libm` supplies an ulp-accurate erfc; statrs'
//! inverse is refined by one Newton step against it.

use libm::erfc;
use statrs::function::erf::erfc_inv;

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Inverse of [`std_normal_cdf`] on (0, 1).
#[inline]
pub fn std_normal_quantile(p: f64) -> f64 {
    let z = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    if !z.is_finite() {
        return z;
    }
    let d = std_normal_pdf(z);
    if d > 0.0 {
        z - (std_normal_cdf(z) - p) / d
    } else {
        z
    }
}
