//! Deterministic bandwidth schedules h_n = c · n^{−δ} · l(n) and symbolic
//! checks of the bandwidth conditions B1, B2, B3.
//!
//! `log` follows the convention log x = ln(max(x, e)), so l(n) ≥ 1 for
//! `Log` and l(n) ≤ 1 for `InvLog`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowlyVarying {
    One,
    Log,
    InvLog,
}

impl FromStr for SlowlyVarying {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one" | "1" => Ok(SlowlyVarying::One),
            "log" => Ok(SlowlyVarying::Log),
            "inv_log" | "invlog" => Ok(SlowlyVarying::InvLog),
            other => Err(Error::invalid(format!(
                "unknown slowly varying factor {other:?} (expected one | log | inv_log)"
            ))),
        }
    }
}

/// ln(max(x, e)).
pub fn log_floor_e(x: f64) -> f64 {
    x.max(std::f64::consts::E).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthSchedule {
    pub c: f64,
    pub delta: f64,
    pub slowly_varying: SlowlyVarying,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BandwidthCondition {
    B1,
    B2,
    B3,
}

impl fmt::Display for BandwidthCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BandwidthCondition::B1 => "B1",
            BandwidthCondition::B2 => "B2",
            BandwidthCondition::B3 => "B3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub condition: BandwidthCondition,
    pub holds: bool,
    pub detail: String,
    /// Exponent e of the canonical witness ω(n) = n^e when B3 holds.
    pub omega_exponent: Option<f64>,
}

impl BandwidthSchedule {
    pub fn new(c: f64, delta: f64, slowly_varying: SlowlyVarying) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!(
                "bandwidth prefactor c must be positive, got {c}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::invalid("bandwidth exponent delta must be finite"));
        }
        Ok(BandwidthSchedule {
            c,
            delta,
            slowly_varying,
        })
    }

    pub fn power(c: f64, delta: f64) -> Result<Self> {
        Self::new(c, delta, SlowlyVarying::One)
    }

    pub fn bandwidth_at(&self, n: u64) -> f64 {
        self.bandwidth_at_real(n.max(1) as f64)
    }

    /// h evaluated at a real sample size `nf ≥ 1`.
    pub fn bandwidth_at_real(&self, nf: f64) -> f64 {
        let l = match self.slowly_varying {
            SlowlyVarying::One => 1.0,
            SlowlyVarying::Log => log_floor_e(nf),
            SlowlyVarying::InvLog => 1.0 / log_floor_e(nf),
        };
        self.c * nf.powf(-self.delta) * l
    }

    /// h_n ↓ 0 and n·h_n → ∞.
    pub fn b1(&self) -> ConditionVerdict {
        let d = self.delta;
        let (holds, detail) = if d > 0.0 && d < 1.0 {
            (true, format!("0 < δ = {d} < 1"))
        } else if d == 1.0 && self.slowly_varying == SlowlyVarying::Log {
            (true, "δ = 1 with l(n) = log n: n·h_n = c·log n → ∞".to_string())
        } else if d >= 1.0 {
            (false, format!("B1 fails: n·h_n does not diverge (δ = {d})"))
        } else {
            (false, format!("B1 fails: h_n does not decrease to 0 (δ = {d} ≤ 0)"))
        };
        ConditionVerdict {
            condition: BandwidthCondition::B1,
            holds,
            detail,
            omega_exponent: None,
        }
    }

    /// h_n ≍ n^{−δ} l(n) with 0 < δ ≤ 1 and l slowly varying.
    pub fn b2(&self) -> ConditionVerdict {
        let d = self.delta;
        let holds = d > 0.0 && d <= 1.0;
        let detail = if holds {
            format!("h_n = c·n^(-{d})·l(n) with 0 < δ ≤ 1")
        } else {
            format!("B2 fails: δ = {d} outside (0, 1]")
        };
        ConditionVerdict {
            condition: BandwidthCondition::B2,
            holds,
            detail,
            omega_exponent: None,
        }
    }

    /// B1 plus √n·ω(n)·h_n → 0 for some ω(n) ↑ ∞; witnessed by ω(n) = n^{(δ−1/2)/2}.
    pub fn b3(&self) -> ConditionVerdict {
        let b1 = self.b1();
        let d = self.delta;
        let (holds, detail, omega) = if !b1.holds {
            (false, format!("B3 fails: requires B1 ({})", b1.detail), None)
        } else if d > 0.5 {
            let e = (d - 0.5) / 2.0;
            (
                true,
                format!("δ = {d} > 1/2; witness ω(n) = n^{e}, √n·ω(n)·h_n ≍ n^(-{e})·l(n) → 0"),
                Some(e),
            )
        } else {
            (false, format!("B3 fails: δ ≤ 1/2 (δ = {d})"), None)
        };
        ConditionVerdict {
            condition: BandwidthCondition::B3,
            holds,
            detail,
            omega_exponent: omega,
        }
    }

    pub fn check_conditions(&self, which: &[BandwidthCondition]) -> Vec<ConditionVerdict> {
        which
            .iter()
            .map(|c| match c {
                BandwidthCondition::B1 => self.b1(),
                BandwidthCondition::B2 => self.b2(),
                BandwidthCondition::B3 => self.b3(),
            })
            .collect()
    }
}
