//! Hypothesis gates: every assumption of the limit theorem an experiment
//! targets is either checked against the configuration or recorded as holding
//! analytically for the built-in models and kernels.

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, SupDomain};
use crate::bandwidth::ConditionVerdict;
use crate::blocking::build_partition;
use crate::error::{Error, Result};
use crate::processes::ProcessFamily;

/// Replicates required before a KS distance is meaningful at the 0.05 scale.
pub const MIN_CLT_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStatus {
    /// Checked against the configuration.
    Enforced,
    /// True for every built-in model/kernel; not re-checked.
    HoldsAnalytically,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub id: String,
    pub statement: String,
    pub status: GateStatus,
    pub holds: bool,
    pub detail: String,
}

fn enforced(id: &str, statement: &str, holds: bool, detail: impl Into<String>) -> Hypothesis {
    Hypothesis {
        id: id.into(),
        statement: statement.into(),
        status: GateStatus::Enforced,
        holds,
        detail: detail.into(),
    }
}

fn analytic(id: &str, statement: &str, detail: &str) -> Hypothesis {
    Hypothesis {
        id: id.into(),
        statement: statement.into(),
        status: GateStatus::HoldsAnalytically,
        holds: true,
        detail: detail.into(),
    }
}

fn from_verdict(v: ConditionVerdict, statement: &str) -> Hypothesis {
    enforced(&v.condition.to_string(), statement, v.holds, v.detail)
}

fn mixing(cfg: &ExperimentConfig, power: f64) -> Hypothesis {
    let holds = cfg.model.mixing_series_converges(power);
    let statement = if power == 1.0 {
        "sum_i rho(2^i) < infinity".to_string()
    } else {
        format!("sum_i rho^{power}(2^i) < infinity")
    };
    enforced(
        "mixing",
        &statement,
        holds,
        format!(
            "{} has geometric or finite-range rho; partial sum over i < 41 is {:.6}",
            cfg.model.family_name(),
            cfg.model.mixing_series(power)
        ),
    )
}

fn b1(cfg: &ExperimentConfig) -> Hypothesis {
    from_verdict(cfg.schedule.b1(), "h_n decreases to 0 and n h_n -> infinity")
}

fn gaussian_marginal(id: &str, statement: &str) -> Hypothesis {
    analytic(id, statement, "Gaussian marginal: smooth, positive, bounded, Lipschitz")
}

fn bounded_kernel() -> Hypothesis {
    analytic(
        "K1",
        "sup|K| < infinity and int |K| < infinity",
        "every built-in kernel is bounded and integrable",
    )
}

fn increasing(cfg: &ExperimentConfig) -> bool {
    cfg.n_list.windows(2).all(|w| w[0] < w[1]) && cfg.n_list.first().is_some_and(|&n| n >= 2)
}

fn n_list_gate(cfg: &ExperimentConfig, min_len: usize) -> Hypothesis {
    let ok = increasing(cfg) && cfg.n_list.len() >= min_len;
    enforced(
        "n_list",
        &format!("n_list strictly increasing, at least {min_len} sizes, each >= 2"),
        ok,
        format!("n_list = {:?}", cfg.n_list),
    )
}

fn clt_hypotheses(cfg: &ExperimentConfig) -> Vec<Hypothesis> {
    let mut hs = vec![mixing(cfg, 1.0)];
    match cfg.kind {
        ExperimentKind::CltCdfTrue => {
            hs.push(from_verdict(
                cfg.schedule.b3(),
                "B1 and sqrt(n) omega(n) h_n -> 0 for some omega(n) increasing to infinity",
            ));
        }
        _ => hs.push(b1(cfg)),
    }
    match cfg.kind {
        ExperimentKind::CltDensity => {
            hs.push(gaussian_marginal("C2", "f uniformly continuous and bounded"));
            hs.push(bounded_kernel());
            let bad: Vec<String> = cfg
                .eval_points
                .iter()
                .filter(|&&x| cfg.model.marginal_density(x) <= crate::estimator::POSITIVITY_TOLERANCE)
                .map(|x| x.to_string())
                .collect();
            hs.push(enforced(
                "positive_density",
                "f(x) > 0 at every evaluation point",
                bad.is_empty(),
                if bad.is_empty() {
                    "f(x) > 0 at all evaluation points".to_string()
                } else {
                    format!("f(x) > 0 fails at x = {}", bad.join(", "))
                },
            ));
        }
        _ => {
            hs.push(gaussian_marginal("density", "f continuous and positive on R"));
            hs.push(enforced(
                "symmetric_kernel",
                "K symmetric with int K = 1",
                cfg.kernel.is_symmetric && cfg.kernel.integrates_to_one,
                format!("{} kernel", cfg.kernel.name()),
            ));
            if cfg.kind == ExperimentKind::CltCdfTrue {
                hs.push(gaussian_marginal("lipschitz_density", "f positive and Lipschitz on R"));
                hs.push(enforced(
                    "bounded_support",
                    "K has bounded support",
                    cfg.kernel.is_compact(),
                    if cfg.kernel.is_compact() {
                        format!("{} kernel is supported on [-1, 1]", cfg.kernel.name())
                    } else {
                        format!(
                            "bounded support fails: {} kernel has unbounded support",
                            cfg.kernel.name()
                        )
                    },
                ));
            }
            let bad: Vec<String> = cfg
                .eval_points
                .iter()
                .filter(|&&x| {
                    let f = cfg.model.marginal_cdf(x);
                    f <= crate::estimator::POSITIVITY_TOLERANCE || f >= 1.0 - crate::estimator::POSITIVITY_TOLERANCE
                })
                .map(|x| x.to_string())
                .collect();
            hs.push(enforced(
                "interior_cdf",
                "0 < F(x) < 1 at every evaluation point",
                bad.is_empty(),
                if bad.is_empty() {
                    "0 < F(x) < 1 at all evaluation points".to_string()
                } else {
                    format!("0 < F(x) < 1 fails at x = {}", bad.join(", "))
                },
            ));
        }
    }
    hs.push(enforced(
        "replicates",
        &format!("replicates >= {MIN_CLT_REPLICATES}"),
        cfg.replicates >= MIN_CLT_REPLICATES,
        format!("replicates = {}", cfg.replicates),
    ));
    hs.push(eval_points_gate(cfg));
    hs.push(n_list_gate(cfg, 1));
    hs
}

fn eval_points_gate(cfg: &ExperimentConfig) -> Hypothesis {
    enforced(
        "eval_points",
        "at least one finite evaluation point",
        !cfg.eval_points.is_empty() && cfg.eval_points.iter().all(|x| x.is_finite()),
        format!("{} evaluation points", cfg.eval_points.len()),
    )
}

fn rate_hypotheses(cfg: &ExperimentConfig) -> Vec<Hypothesis> {
    let p = cfg.p;
    let mut hs = vec![enforced(
        "p",
        "p >= 2",
        p >= 2.0,
        if p >= 2.0 {
            format!("p = {p}")
        } else {
            format!("p >= 2 fails: p = {p}")
        },
    )];
    hs.push(mixing(cfg, if p > 0.0 { 2.0 / p } else { 1.0 }));
    hs.push(b1(cfg));
    hs.push(gaussian_marginal("C1", "f uniformly bounded"));
    hs.push(bounded_kernel());
    if cfg.kind == ExperimentKind::RateSupLp {
        hs.push(eval_points_gate(cfg));
    }
    hs.push(enforced(
        "replicates",
        "replicates >= 2",
        cfg.replicates >= 2,
        format!("replicates = {}", cfg.replicates),
    ));
    hs.push(n_list_gate(cfg, 3));
    hs
}

fn uniform_hypotheses(cfg: &ExperimentConfig) -> Vec<Hypothesis> {
    let m = &cfg.model;
    let rho1_exact = m.rho_is_exact(1);
    let rho1 = m.rho_mixing_coefficient(1).unwrap_or(f64::NAN);
    let (holds, detail) = match m.family() {
        ProcessFamily::Ma { .. } if !rho1_exact => (
            false,
            format!("ρ(1) ≤ 1/4 cannot be certified: only the lower bound rho(1) >= {rho1} is known"),
        ),
        _ if rho1 <= 0.25 => (true, format!("rho(1)={rho1} <= 1/4")),
        _ => (false, format!("ρ(1) ≤ 1/4 fails: rho(1)={rho1} > 1/4")),
    };
    let mut hs = vec![enforced("rho1", "ρ(1) ≤ 1/4", holds, detail)];
    hs.push(mixing(cfg, 1.0));
    hs.push(from_verdict(
        cfg.schedule.b2(),
        "h_n ~ n^-delta l(n), 0 < delta <= 1, l slowly varying",
    ));
    hs.push(gaussian_marginal("C1", "f uniformly bounded"));
    let k = &cfg.kernel;
    hs.push(enforced(
        "K2",
        "K compactly supported and Lipschitz",
        k.is_compact() && k.is_lipschitz(),
        if !k.is_compact() {
            format!("K2 fails: {} kernel is not compactly supported", k.name())
        } else if !k.is_lipschitz() {
            format!("K2 fails: {} kernel is not Lipschitz", k.name())
        } else {
            format!(
                "{} kernel: support [-1, 1], Lipschitz constant {}",
                k.name(),
                k.lipschitz_const.unwrap()
            )
        },
    ));
    match cfg.sup_domain {
        SupDomain::Compact => hs.push(analytic(
            "compact_domain",
            "D compact",
            "D is the configured grid interval",
        )),
        SupDomain::WholeLine => hs.push(analytic(
            "moments",
            "X in L^p for some p >= 2",
            "Gaussian marginal has moments of all orders",
        )),
    }
    let h0 = cfg.schedule.bandwidth_at(cfg.n_list.first().copied().unwrap_or(1));
    hs.push(enforced(
        "normalizer",
        "h_n < 1 so that |log h_n| > 0",
        h0 < 1.0,
        format!("h at the smallest n is {h0}"),
    ));
    hs.push(enforced(
        "replicates",
        "at least one path",
        cfg.replicates >= 1,
        format!("{} paths", cfg.replicates),
    ));
    hs.push(n_list_gate(cfg, 3));
    hs
}

fn bias_hypotheses(cfg: &ExperimentConfig) -> Vec<Hypothesis> {
    vec![
        analytic(
            "K3",
            "sup|K| < infinity and int |u K(u)| du < infinity",
            "every built-in kernel",
        ),
        gaussian_marginal("C3", "f bounded with bounded continuous derivative"),
        enforced(
            "symmetric_kernel",
            "symmetric kernel (asymmetric evaluation out of scope)",
            cfg.kernel.is_symmetric,
            format!("{} kernel", cfg.kernel.name()),
        ),
        enforced(
            "decreasing_bandwidth",
            "h_n strictly decreasing along n_list",
            cfg.schedule.delta > 0.0,
            format!("delta = {}", cfg.schedule.delta),
        ),
        eval_points_gate(cfg),
        n_list_gate(cfg, 3),
    ]
}

fn moment_hypotheses(cfg: &ExperimentConfig) -> Vec<Hypothesis> {
    let p_even = cfg.p >= 2.0 && cfg.p.fract() == 0.0 && (cfg.p as u64).is_multiple_of(2);
    let mut hs = vec![
        enforced(
            "markov",
            "model is Markov (iid or ar1)",
            cfg.model.is_markov(),
            format!("{} model", cfg.model.family_name()),
        ),
        enforced("p_even", "p an even integer >= 2", p_even, format!("p = {}", cfg.p)),
        mixing(cfg, 1.0),
    ];
    let b = cfg.blocking.as_ref();
    let bad: Vec<String> = b
        .map(|b| {
            b.k_list
                .iter()
                .filter_map(|&k| {
                    build_partition(k, b.alpha, b.beta)
                        .err()
                        .map(|e| format!("k = {k}: {e}"))
                })
                .collect()
        })
        .unwrap_or_default();
    let nonempty = b.is_some_and(|b| !b.k_list.is_empty());
    hs.push(enforced(
        "partition",
        "0 < beta < alpha < 1 and nonempty blocks at every level",
        nonempty && bad.is_empty(),
        if bad.is_empty() {
            "all levels partition".to_string()
        } else {
            bad.join("; ")
        },
    ));
    hs.push(enforced(
        "replicates",
        "replicates >= 2",
        cfg.replicates >= 2,
        format!("replicates = {}", cfg.replicates),
    ));
    hs
}

/// Every hypothesis of the experiment's target statement, with its status.
pub fn hypotheses(cfg: &ExperimentConfig) -> Vec<Hypothesis> {
    match cfg.kind {
        k if k.is_clt() => clt_hypotheses(cfg),
        k if k.is_rate() => rate_hypotheses(cfg),
        ExperimentKind::RateUniformAs => uniform_hypotheses(cfg),
        ExperimentKind::Bias => bias_hypotheses(cfg),
        _ => moment_hypotheses(cfg),
    }
}

/// The hypothesis list, or a gate error naming each violated condition.
pub fn enforce_gates(cfg: &ExperimentConfig) -> Result<Vec<Hypothesis>> {
    let hs = hypotheses(cfg);
    let failed: Vec<String> = hs
        .iter()
        .filter(|h| !h.holds)
        .map(|h| format!("({}) {}", h.id, h.detail))
        .collect();
    if failed.is_empty() {
        Ok(hs)
    } else {
        Err(Error::gate(failed.join("; ")))
    }
}
