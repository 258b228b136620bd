//! Kernel functions, their integrated forms, and analytic constants.
//!
//! | family       | K(u)                  | support    | ∫K² (R(K))  | sup K     | Lipschitz |
//! |--------------|-----------------------|------------|-------------|-----------|-----------|
//! | gaussian     | exp(−u²/2)/√(2π)      | ℝ          | 1/(2√π)     | 1/√(2π)   | φ(1)      |
//! | epanechnikov | ¾(1 − u²)             | [−1, 1]    | 3/5         | 3/4       | 3/2       |
//! | triangular   | 1 − \|u\|             | [−1, 1]    | 2/3         | 1         | 1         |
//! | uniform      | ½                     | [−1, 1]    | 1/2         | 1/2       | none      |
//!
//! All four are symmetric, nonnegative and integrate to one. Constants are
//! stored in closed form; the tests recompute them by quadrature.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{std_normal_cdf, std_normal_pdf, FRAC_1_SQRT_2PI};

/// Truncation radius used when a Gaussian kernel has to be treated as if it
/// were compactly supported (binning, quadrature). The mass beyond is < 1.3e-15.
pub const GAUSSIAN_TRUNCATION: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    Epanechnikov,
    Triangular,
    Uniform,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::Gaussian,
        KernelFamily::Epanechnikov,
        KernelFamily::Triangular,
        KernelFamily::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Triangular => "triangular",
            KernelFamily::Uniform => "uniform",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            "triangular" => Ok(KernelFamily::Triangular),
            "uniform" => Ok(KernelFamily::Uniform),
            other => Err(Error::invalid(format!(
                "unknown kernel {other:?} (expected gaussian | epanechnikov | triangular | uniform)"
            ))),
        }
    }
}

/// A kernel together with the constants the normalizations need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// ‖K‖₁ = ∫|K|.
    pub l1_norm: f64,
    /// ‖K‖₂² = ∫K².
    pub l2_norm_sq: f64,
    /// ‖K‖_∞.
    pub sup_norm: f64,
    /// Smallest R with K(u) = 0 for |u| > R; `f64::INFINITY` for the Gaussian.
    pub support_radius: f64,
    /// `None` when K is not Lipschitz.
    pub lipschitz_const: Option<f64>,
    /// ∫|u K(u)| du.
    pub abs_first_moment: f64,
    /// ∫u² K(u) du.
    pub second_moment: f64,
    pub is_symmetric: bool,
    pub integrates_to_one: bool,
}

/// The constant subset reported by [`KernelSpec::constants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConstants {
    pub l1_norm: f64,
    pub l2_norm_sq: f64,
    pub sup_norm: f64,
    pub support_radius: f64,
    pub lipschitz_const: Option<f64>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Self {
        let (l2, sup, radius, lip, m1, m2) = match family {
            KernelFamily::Gaussian => (
                0.5 / std::f64::consts::PI.sqrt(),
                FRAC_1_SQRT_2PI,
                f64::INFINITY,
                Some(FRAC_1_SQRT_2PI * (-0.5f64).exp()),
                2.0 * FRAC_1_SQRT_2PI,
                1.0,
            ),
            KernelFamily::Epanechnikov => (0.6, 0.75, 1.0, Some(1.5), 0.375, 0.2),
            KernelFamily::Triangular => (2.0 / 3.0, 1.0, 1.0, Some(1.0), 1.0 / 3.0, 1.0 / 6.0),
            KernelFamily::Uniform => (0.5, 0.5, 1.0, None, 0.5, 1.0 / 3.0),
        };
        KernelSpec {
            family,
            l1_norm: 1.0,
            l2_norm_sq: l2,
            sup_norm: sup,
            support_radius: radius,
            lipschitz_const: lip,
            abs_first_moment: m1,
            second_moment: m2,
            is_symmetric: true,
            integrates_to_one: true,
        }
    }

    pub fn gaussian() -> Self {
        Self::new(KernelFamily::Gaussian)
    }

    pub fn epanechnikov() -> Self {
        Self::new(KernelFamily::Epanechnikov)
    }

    pub fn triangular() -> Self {
        Self::new(KernelFamily::Triangular)
    }

    pub fn uniform() -> Self {
        Self::new(KernelFamily::Uniform)
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    pub fn constants(&self) -> KernelConstants {
        KernelConstants {
            l1_norm: self.l1_norm,
            l2_norm_sq: self.l2_norm_sq,
            sup_norm: self.sup_norm,
            support_radius: self.support_radius,
            lipschitz_const: self.lipschitz_const,
        }
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius.is_finite()
    }

    pub fn is_lipschitz(&self) -> bool {
        self.lipschitz_const.is_some()
    }

    /// Radius beyond which the kernel is treated as zero: the support radius
    /// for compact kernels, [`GAUSSIAN_TRUNCATION`] for the Gaussian.
    pub fn effective_radius(&self) -> f64 {
        if self.is_compact() {
            self.support_radius
        } else {
            GAUSSIAN_TRUNCATION
        }
    }

    /// Interior points where K is not differentiable (used as quadrature breakpoints).
    pub fn kinks(&self) -> &'static [f64] {
        match self.family {
            KernelFamily::Triangular => &[0.0],
            _ => &[],
        }
    }

    /// K(u).
    #[inline]
    pub fn evaluate(&self, u: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => std_normal_pdf(u),
            KernelFamily::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelFamily::Triangular => {
                let a = u.abs();
                if a <= 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
            KernelFamily::Uniform => {
                if u.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    /// G_K(u) = ∫_{−∞}^{u} K, in closed form. Accepts ±∞.
    #[inline]
    pub fn cdf(&self, u: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => std_normal_cdf(u),
            KernelFamily::Epanechnikov => {
                if u <= -1.0 {
                    0.0
                } else if u >= 1.0 {
                    1.0
                } else {
                    0.5 + 0.75 * u - 0.25 * u * u * u
                }
            }
            KernelFamily::Triangular => {
                if u <= -1.0 {
                    0.0
                } else if u <= 0.0 {
                    0.5 * (1.0 + u) * (1.0 + u)
                } else if u < 1.0 {
                    1.0 - 0.5 * (1.0 - u) * (1.0 - u)
                } else {
                    1.0
                }
            }
            KernelFamily::Uniform => {
                if u <= -1.0 {
                    0.0
                } else if u >= 1.0 {
                    1.0
                } else {
                    0.5 * (u + 1.0)
                }
            }
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<KernelFamily>().map(KernelSpec::new)
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Free-function form of [`KernelSpec::evaluate`].
pub fn evaluate(kernel: &KernelSpec, u: f64) -> f64 {
    kernel.evaluate(u)
}

/// Free-function form of [`KernelSpec::cdf`].
pub fn kernel_cdf(kernel: &KernelSpec, u: f64) -> f64 {
    kernel.cdf(u)
}

/// Free-function form of [`KernelSpec::constants`].
pub fn kernel_constants(kernel: &KernelSpec) -> KernelConstants {
    kernel.constants()
}
