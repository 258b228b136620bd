//! Flat `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, dotted prefixes group related keys.
//! Unknown and duplicate keys are errors; every error names its line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bandwidth::{BandwidthSchedule, SlowlyVarying};
use crate::error::{Error, Result};
use crate::estimator::Grid;
use crate::format::fmt_f64;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::processes::{ProcessFamily, ProcessModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CltDensity,
    CltCdfCentered,
    CltCdfTrue,
    RateSupLp,
    RateIntegralLp,
    RateUniformAs,
    Bias,
    MomentBound,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::CltDensity,
        ExperimentKind::CltCdfCentered,
        ExperimentKind::CltCdfTrue,
        ExperimentKind::RateSupLp,
        ExperimentKind::RateIntegralLp,
        ExperimentKind::RateUniformAs,
        ExperimentKind::Bias,
        ExperimentKind::MomentBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CltDensity => "clt_density",
            ExperimentKind::CltCdfCentered => "clt_cdf_centered",
            ExperimentKind::CltCdfTrue => "clt_cdf_true",
            ExperimentKind::RateSupLp => "rate_sup_lp",
            ExperimentKind::RateIntegralLp => "rate_integral_lp",
            ExperimentKind::RateUniformAs => "rate_uniform_as",
            ExperimentKind::Bias => "bias",
            ExperimentKind::MomentBound => "moment_bound",
        }
    }

    pub fn is_clt(self) -> bool {
        matches!(
            self,
            ExperimentKind::CltDensity | ExperimentKind::CltCdfCentered | ExperimentKind::CltCdfTrue
        )
    }

    pub fn is_rate(self) -> bool {
        matches!(self, ExperimentKind::RateSupLp | ExperimentKind::RateIntegralLp)
    }

    fn default_replicates(self) -> usize {
        match self {
            k if k.is_clt() => 2000,
            ExperimentKind::RateUniformAs => 20,
            ExperimentKind::MomentBound => 1000,
            ExperimentKind::Bias => 1,
            _ => 500,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Where the sup of the uniform-rate experiment is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupDomain {
    /// The configured grid, a compact set D.
    Compact,
    /// [−8s, 8s] for marginal sd s, at the configured grid spacing.
    WholeLine,
}

impl FromStr for SupDomain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "compact" => Ok(SupDomain::Compact),
            "whole_line" => Ok(SupDomain::WholeLine),
            _ => Err(format!("unknown sup_domain `{s}` (expected compact or whole_line)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockingConfig {
    pub alpha: f64,
    pub beta: f64,
    pub k_list: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ProcessModel,
    pub kernel: KernelSpec,
    pub schedule: BandwidthSchedule,
    pub grid: Grid,
    pub n_list: Vec<u64>,
    pub replicates: usize,
    pub eval_points: Vec<f64>,
    pub p: f64,
    pub base_seed: u64,
    pub sup_domain: SupDomain,
    pub blocking: Option<BlockingConfig>,
}

const KEYS: [&str; 21] = [
    "experiment",
    "model.family",
    "model.phi",
    "model.weights",
    "model.innovation_sd",
    "kernel",
    "bandwidth.c",
    "bandwidth.delta",
    "bandwidth.slowly_varying",
    "grid.lo",
    "grid.hi",
    "grid.m",
    "n_list",
    "replicates",
    "eval_points",
    "p",
    "seed",
    "sup_domain",
    "blocking.alpha",
    "blocking.beta",
    "blocking.k_list",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
    last_line: usize,
}

impl Entries {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn line_of(&self, key: &str) -> usize {
        self.map.get(key).map_or(self.last_line, |(l, _)| *l)
    }

    fn required(&self, key: &str, kind: ExperimentKind) -> Result<(usize, &str)> {
        self.get(key).ok_or_else(|| Error::Config {
            line: self.last_line,
            message: format!("missing required key `{key}` for experiment {kind}"),
        })
    }

    /// `value` if present, the default when the kind does not need the key,
    /// otherwise a missing-key error.
    fn needed<T>(&self, value: Option<T>, default: T, needs: bool, key: &str, kind: ExperimentKind) -> Result<T> {
        match value {
            Some(v) => Ok(v),
            None if needs => Err(self.required(key, kind).unwrap_err()),
            None => Ok(default),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|e| Error::Config {
                line,
                message: format!("malformed value for `{key}`: `{v}` ({e})"),
            }),
        }
    }

    fn list<T>(&self, key: &str, item: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|t| item(t.trim()))
                .collect::<std::result::Result<Vec<T>, String>>()
                .map(Some)
                .map_err(|e| Error::Config {
                    line,
                    message: format!("malformed list for `{key}`: {e}"),
                }),
        }
    }
}

fn parse_f64(t: &str) -> std::result::Result<f64, String> {
    let v: f64 = t.parse().map_err(|_| format!("`{t}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{t}` is not finite"))
    }
}

/// A count written as an integer or as `base^exponent`, e.g. `2^17` or `10^4`.
fn parse_count(t: &str) -> std::result::Result<u64, String> {
    if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.trim().parse().map_err(|_| format!("`{t}` is not a count"))?;
        let e: u32 = e.trim().parse().map_err(|_| format!("`{t}` is not a count"))?;
        b.checked_pow(e).ok_or_else(|| format!("`{t}` overflows"))
    } else {
        t.parse().map_err(|_| format!("`{t}` is not a count"))
    }
}

fn parse_seed(t: &str) -> std::result::Result<u64, String> {
    let r = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    r.map_err(|_| format!("`{t}` is not a 64-bit unsigned integer"))
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Config {
                line,
                message: format!("empty value for `{key}`"),
            });
        }
        if let Some((first, _)) = map.get(key) {
            return Err(Error::Config {
                line,
                message: format!("duplicate key `{key}` (first set on line {first})"),
            });
        }
        map.insert(key.to_string(), (line, value.to_string()));
    }
    Ok(Entries { map, last_line })
}

fn at_line(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidParameter(m) => Error::Config { line, message: m },
        other => other,
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let e = tokenize(text)?;
        let kind_line = e.get("experiment").map_or(e.last_line, |(l, _)| l);
        let kind: ExperimentKind = e.parsed("experiment")?.ok_or(Error::Config {
            line: kind_line,
            message: "missing required key `experiment`".into(),
        })?;
        let needs_estimator = kind != ExperimentKind::MomentBound;

        let family_line = e.required("model.family", kind)?.0;
        let sd: f64 = e.parsed("model.innovation_sd")?.unwrap_or(1.0);
        let family = match e.required("model.family", kind)?.1 {
            "iid" => ProcessFamily::Iid,
            "ar1" => {
                let (l, _) = e.required("model.phi", kind)?;
                let phi = e.parsed::<f64>("model.phi")?.unwrap();
                if phi.is_nan() || phi.abs() >= 1.0 {
                    return Err(Error::Config {
                        line: l,
                        message: format!("AR(1) requires |phi| < 1, got {phi}"),
                    });
                }
                ProcessFamily::Ar1 { phi }
            }
            "ma" => {
                e.required("model.weights", kind)?;
                let weights = e.list("model.weights", parse_f64)?.unwrap();
                ProcessFamily::Ma { weights }
            }
            other => {
                return Err(Error::Config {
                    line: family_line,
                    message: format!("unknown model family `{other}` (expected iid, ar1 or ma)"),
                })
            }
        };
        let model = ProcessModel::new(family, sd).map_err(at_line(family_line))?;

        let kernel = KernelSpec::new(e.needed(
            e.parsed::<KernelFamily>("kernel")?,
            KernelFamily::Epanechnikov,
            needs_estimator,
            "kernel",
            kind,
        )?);

        let c: f64 = e.parsed("bandwidth.c")?.unwrap_or(1.0);
        let delta: f64 = e.needed(
            e.parsed("bandwidth.delta")?,
            0.2,
            needs_estimator,
            "bandwidth.delta",
            kind,
        )?;
        let sv: SlowlyVarying = e.parsed("bandwidth.slowly_varying")?.unwrap_or(SlowlyVarying::One);
        let schedule = BandwidthSchedule::new(c, delta, sv).map_err(at_line(e.line_of("bandwidth.c")))?;

        let grid = Grid::new(
            e.parsed("grid.lo")?.unwrap_or(-2.0),
            e.parsed("grid.hi")?.unwrap_or(2.0),
            e.parsed("grid.m")?.unwrap_or(401),
        )
        .map_err(at_line(e.line_of("grid.lo")))?;

        let n_list = e.needed(
            e.list("n_list", parse_count)?,
            Vec::new(),
            needs_estimator,
            "n_list",
            kind,
        )?;
        let replicates = e.parsed("replicates")?.unwrap_or(kind.default_replicates());
        let eval_points = e.list("eval_points", parse_f64)?.unwrap_or_else(|| vec![0.0]);
        let p: f64 = e.parsed("p")?.unwrap_or(2.0);
        let (seed_line, seed_text) = e.required("seed", kind)?;
        let base_seed = parse_seed(seed_text).map_err(|m| Error::Config {
            line: seed_line,
            message: format!("malformed value for `seed`: {m}"),
        })?;
        let sup_domain = e.parsed("sup_domain")?.unwrap_or(SupDomain::Compact);

        let blocking = if kind == ExperimentKind::MomentBound {
            e.required("blocking.alpha", kind)?;
            e.required("blocking.beta", kind)?;
            e.required("blocking.k_list", kind)?;
            Some(BlockingConfig {
                alpha: e.parsed("blocking.alpha")?.unwrap(),
                beta: e.parsed("blocking.beta")?.unwrap(),
                k_list: e
                    .list("blocking.k_list", |t| {
                        t.parse::<u32>().map_err(|_| format!("`{t}` is not a level"))
                    })?
                    .unwrap(),
            })
        } else {
            None
        };

        Ok(ExperimentConfig {
            kind,
            model,
            kernel,
            schedule,
            grid,
            n_list,
            replicates,
            eval_points,
            p,
            base_seed,
            sup_domain,
            blocking,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_list.iter().copied().max().unwrap_or(0)
    }

    /// Every resolved setting, defaults included, as canonical strings.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.kind.name().into());
        put("model.family", self.model.family_name().into());
        match self.model.family() {
            ProcessFamily::Iid => {}
            ProcessFamily::Ar1 { phi } => put("model.phi", fmt_f64(*phi)),
            ProcessFamily::Ma { weights } => put("model.weights", join_f64(weights)),
        }
        put("model.innovation_sd", fmt_f64(self.model.innovation_sd()));
        put("kernel", self.kernel.name().into());
        put("bandwidth.c", fmt_f64(self.schedule.c));
        put("bandwidth.delta", fmt_f64(self.schedule.delta));
        put(
            "bandwidth.slowly_varying",
            match self.schedule.slowly_varying {
                SlowlyVarying::One => "one",
                SlowlyVarying::Log => "log",
                SlowlyVarying::InvLog => "inv_log",
            }
            .into(),
        );
        put("grid.lo", fmt_f64(self.grid.lo));
        put("grid.hi", fmt_f64(self.grid.hi));
        put("grid.m", self.grid.m.to_string());
        if !self.n_list.is_empty() {
            put(
                "n_list",
                self.n_list.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            );
        }
        put("replicates", self.replicates.to_string());
        put("eval_points", join_f64(&self.eval_points));
        put("p", fmt_f64(self.p));
        put("seed", self.base_seed.to_string());
        put(
            "sup_domain",
            match self.sup_domain {
                SupDomain::Compact => "compact",
                SupDomain::WholeLine => "whole_line",
            }
            .into(),
        );
        if let Some(b) = &self.blocking {
            put("blocking.alpha", fmt_f64(b.alpha));
            put("blocking.beta", fmt_f64(b.beta));
            put(
                "blocking.k_list",
                b.k_list.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
            );
        }
        m
    }

    /// The echo rendered in the config file format; parses back to `self`.
    pub fn to_text(&self) -> String {
        self.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLT: &str = "\
# density CLT under AR(1)
experiment = clt_density
model.family = ar1
model.phi = 0.5
kernel = gaussian
bandwidth.delta = 0.2   # h_n = n^-0.2
n_list = 10^4
eval_points = -1, 0, 1
seed = 42
";

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(CLT).unwrap();
        assert_eq!(c.kind, ExperimentKind::CltDensity);
        assert_eq!(c.model, ProcessModel::ar1(0.5, 1.0).unwrap());
        assert_eq!(c.kernel.family, KernelFamily::Gaussian);
        assert_eq!(c.schedule, BandwidthSchedule::power(1.0, 0.2).unwrap());
        assert_eq!(c.grid, Grid::new(-2.0, 2.0, 401).unwrap());
        assert_eq!(c.n_list, vec![10_000]);
        assert_eq!(c.replicates, 2000);
        assert_eq!(c.eval_points, vec![-1.0, 0.0, 1.0]);
        assert_eq!(c.base_seed, 42);
        assert!(c.blocking.is_none());
    }

    #[test]
    fn echo_round_trips() {
        let c = ExperimentConfig::parse(CLT).unwrap();
        let again = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
        let ma = ExperimentConfig::parse(
            "experiment = moment_bound\nmodel.family = ma\nmodel.weights = 1, 0.5\nseed = 0x10\n\
             blocking.alpha = 0.3\nblocking.beta = 0.08\nblocking.k_list = 6,7,8\n",
        )
        .unwrap();
        assert_eq!(ma.base_seed, 16);
        assert_eq!(ExperimentConfig::parse(&ma.to_text()).unwrap(), ma);
    }

    #[test]
    fn counts_accept_powers() {
        assert_eq!(parse_count("2^17"), Ok(131_072));
        assert_eq!(parse_count("1000"), Ok(1000));
        assert!(parse_count("2^70").is_err());
        assert!(parse_count("x").is_err());
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Config { line, .. } => line,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_num = CLT.replace("bandwidth.delta = 0.2", "bandwidth.delta = 0.2x");
        assert_eq!(line_of(ExperimentConfig::parse(&bad_num).unwrap_err()), 6);
        let unknown = format!("{CLT}colour = blue\n");
        assert_eq!(line_of(ExperimentConfig::parse(&unknown).unwrap_err()), 10);
        let dup = format!("{CLT}seed = 7\n");
        let e = ExperimentConfig::parse(&dup).unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
        let phi = CLT.replace("model.phi = 0.5", "model.phi = 1.5");
        assert_eq!(line_of(ExperimentConfig::parse(&phi).unwrap_err()), 4);
        let no_eq = CLT.replace("kernel = gaussian", "kernel gaussian");
        assert_eq!(line_of(ExperimentConfig::parse(&no_eq).unwrap_err()), 5);
        let no_seed = CLT.replace("seed = 42", "");
        assert!(ExperimentConfig::parse(&no_seed)
            .unwrap_err()
            .to_string()
            .contains("seed"));
        let bad_kind = CLT.replace("clt_density", "clt_densty");
        assert_eq!(line_of(ExperimentConfig::parse(&bad_kind).unwrap_err()), 2);
    }
}
