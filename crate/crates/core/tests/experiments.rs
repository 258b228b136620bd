use mixkde::experiments::gates::MIN_CLT_REPLICATES;
use mixkde::experiments::{enforce_gates, hypotheses, GateStatus};
use mixkde::stats::mean;
use mixkde::{run_experiment, Error, ExperimentConfig, ExperimentKind, ExperimentReport, Verdict};

const SEED: u64 = 20261014;

fn parse(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

fn run(text: &str) -> ExperimentReport {
    run_experiment(&parse(text)).unwrap()
}

fn gate_message(text: &str) -> String {
    match run_experiment(&parse(text)) {
        Err(Error::Gate(msg)) => msg,
        other => panic!("expected a gate error, got {other:?}"),
    }
}

fn summary_value(r: &ExperimentReport, column: &str, row: usize) -> f64 {
    r.summary.column(column).unwrap()[row]
}

#[test]
fn gates_reject_with_the_failing_condition() {
    let m = gate_message(
        "experiment = clt_density\nmodel.family = iid\nkernel = gaussian\nbandwidth.delta = 1.2\n\
         n_list = 1000\nseed = 1\n",
    );
    assert!(m.contains("(B1)") && m.contains("B1 fails"), "{m}");

    let m = gate_message(
        "experiment = rate_sup_lp\nmodel.family = iid\nkernel = epanechnikov\nbandwidth.delta = 0.2\n\
         n_list = 100, 200, 400\np = 1.5\nseed = 1\n",
    );
    assert!(m.contains("p >= 2 fails: p = 1.5"), "{m}");

    let m = gate_message(
        "experiment = rate_uniform_as\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = epanechnikov\n\
         bandwidth.delta = 0.3\nn_list = 2^10, 2^11, 2^12\nseed = 1\n",
    );
    assert!(m.contains("rho(1)=0.5 > 1/4"), "{m}");

    let m = gate_message(
        "experiment = rate_uniform_as\nmodel.family = iid\nkernel = gaussian\n\
         bandwidth.delta = 0.3\nn_list = 2^10, 2^11, 2^12\nseed = 1\n",
    );
    assert!(
        m.contains("K2 fails: gaussian kernel is not compactly supported"),
        "{m}"
    );

    let m = gate_message(
        "experiment = clt_cdf_true\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = epanechnikov\n\
         bandwidth.delta = 0.2\nn_list = 10^4\neval_points = 0.5\nseed = 1\n",
    );
    assert!(m.contains("B3 fails: δ ≤ 1/2"), "{m}");

    let m = gate_message(
        "experiment = rate_integral_lp\nmodel.family = iid\nkernel = epanechnikov\nbandwidth.delta = 0.2\n\
         n_list = 100, 200\nseed = 1\n",
    );
    assert!(m.contains("(n_list)"), "{m}");

    let m = gate_message(&format!(
        "experiment = clt_density\nmodel.family = iid\nkernel = gaussian\nbandwidth.delta = 0.2\n\
         n_list = 1000\nreplicates = {}\nseed = 1\n",
        MIN_CLT_REPLICATES - 1
    ));
    assert!(m.contains("(replicates)"), "{m}");
}

#[test]
fn every_gate_of_a_valid_config_holds() {
    for kind in ExperimentKind::ALL {
        let text = match kind {
            ExperimentKind::MomentBound => "experiment = moment_bound\nmodel.family = ar1\nmodel.phi = 0.25\n\
                 blocking.alpha = 0.3\nblocking.beta = 0.08\nblocking.k_list = 6,7\nseed = 1\n"
                .to_string(),
            ExperimentKind::RateUniformAs => "experiment = rate_uniform_as\nmodel.family = ar1\nmodel.phi = 0.2\n\
                 kernel = epanechnikov\nbandwidth.delta = 0.3\nn_list = 2^10, 2^11, 2^12\nseed = 1\n"
                .to_string(),
            _ => format!(
                "experiment = {}\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = epanechnikov\n\
                 bandwidth.delta = 0.6\nn_list = 100, 200, 400\neval_points = 0.5\nseed = 1\n",
                kind.name()
            ),
        };
        let cfg = parse(&text);
        let hs = enforce_gates(&cfg).unwrap_or_else(|e| panic!("{kind}: {e}"));
        assert!(hs.iter().all(|h| h.holds), "{kind}");
        assert_eq!(hs, hypotheses(&cfg));
        assert!(hs.iter().any(|h| h.status == GateStatus::Enforced));
    }
}

#[test]
fn iid_density_clt_matches_the_exact_finite_n_variance() {
    // exact variance of the standardized statistic at n = 10^4, h = 10^-0.8,
    // x = 0 is 1 − h f(0)/‖K‖² · (1 + smaller terms) = 0.775 for the Gaussian kernel
    let r = run(&format!(
        "experiment = clt_density\nmodel.family = iid\nkernel = gaussian\nbandwidth.delta = 0.2\n\
         n_list = 10^4\nreplicates = 2000\neval_points = 0\nseed = {SEED}\n"
    ));
    let v = summary_value(&r, "variance", 0);
    // sd of a sample variance from 2000 normals is v·sqrt(2/1999) ≈ 0.025
    assert!((v - 0.775).abs() < 0.075, "variance {v}");
    assert!(summary_value(&r, "mean", 0).abs() < 0.1);
    assert!(r.ks_distance.unwrap() < 0.1);
}

#[test]
fn iid_cdf_clt_passes() {
    let r = run(&format!(
        "experiment = clt_cdf_centered\nmodel.family = iid\nkernel = epanechnikov\nbandwidth.delta = 0.2\n\
         n_list = 10^4\nreplicates = 2000\neval_points = 0.5\nseed = {SEED}\n"
    ));
    assert!(r.passed(), "{:?}", r.checks);
    let r = run(&format!(
        "experiment = clt_cdf_true\nmodel.family = iid\nkernel = epanechnikov\nbandwidth.delta = 0.6\n\
         n_list = 10^4\nreplicates = 2000\neval_points = 0.5\nseed = {SEED}\n"
    ));
    assert!(r.passed(), "{:?}", r.checks);
}

fn rate_config(replicates: usize) -> String {
    format!(
        "experiment = rate_sup_lp\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = epanechnikov\n\
         bandwidth.delta = 0.2\nn_list = 2^8, 2^9, 2^10, 2^11, 2^12\nreplicates = {replicates}\n\
         eval_points = 0\np = 2\nseed = {SEED}\n"
    )
}

#[test]
fn small_rate_run_recovers_the_slope() {
    let r = run(&rate_config(400));
    let fit = r.fit.unwrap();
    assert!((fit.slope + 0.4).abs() < 0.1, "slope {}", fit.slope);
    assert_eq!(r.theorem_prediction, Some(-0.4));
    assert!(r.passed());
}

#[test]
fn monte_carlo_error_shrinks_like_root_replicates() {
    let a = mean(&run(&rate_config(200)).summary.column("mc_se").unwrap());
    let b = mean(&run(&rate_config(400)).summary.column("mc_se").unwrap());
    let ratio = a / b;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn reruns_are_byte_identical() {
    let text = rate_config(50);
    assert_eq!(run(&text).to_json(), run(&text).to_json());
    let other = text.replace(&format!("seed = {SEED}"), "seed = 7");
    assert_ne!(run(&text).to_json(), run(&other).to_json());
}

#[test]
fn bias_of_the_gaussian_kernel_is_quadratic_in_h() {
    let r = run(
        "experiment = bias\nmodel.family = iid\nkernel = gaussian\nbandwidth.delta = 0.25\n\
         n_list = 2^8, 2^10, 2^12, 2^14, 2^16, 2^18, 2^20\neval_points = 0.5\nseed = 1\n",
    );
    // E f_n is the N(0, 1 + h^2) density for a Gaussian kernel and N(0, 1) data
    let phi = |x: f64, s: f64| (-0.5 * (x / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
    let hs = r.summary.column("h").unwrap();
    let bias = r.summary.column("bias").unwrap();
    let bound = r.summary.column("bound").unwrap();
    for ((&h, &b), &bd) in hs.iter().zip(&bias).zip(&bound) {
        let exact = phi(0.5, (1.0 + h * h).sqrt()) - phi(0.5, 1.0);
        assert!((b - exact).abs() < 1e-10, "h {h}: {b} vs {exact}");
        assert!(b.abs() <= bd);
    }
    let fit = r.fit.unwrap();
    assert!((fit.slope - 2.0).abs() < 0.02, "slope {}", fit.slope);
    assert_eq!(r.check("bound_violations").unwrap().value, 0.0);
}

#[test]
fn moment_bound_vanishes_for_iid_data() {
    let r = run(
        "experiment = moment_bound\nmodel.family = iid\np = 4\nreplicates = 50\nblocking.alpha = 0.3\n\
         blocking.beta = 0.08\nblocking.k_list = 6, 7, 8\nseed = 3\n",
    );
    assert!(r.summary.column("lhs").unwrap().iter().all(|&v| v == 0.0));
    assert!(r.summary.column("ratio").unwrap().iter().all(|&v| v == 0.0));
    assert!(r.passed());
}

#[test]
fn report_json_carries_every_field_and_a_consistent_verdict() {
    let r = run(&rate_config(50));
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for key in [
        "kind",
        "base_seed",
        "config",
        "hypotheses",
        "summary",
        "fit",
        "ks_distance",
        "theorem_prediction",
        "checks",
        "verdict",
        "notes",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["kind"], "rate_sup_lp");
    assert_eq!(json["base_seed"], SEED);
    assert_eq!(json["config"]["model.phi"], "5.0000000000000000e-1");
    assert_eq!(r.verdict, ExperimentReport::verdict_from_checks(&r.checks));
    let expected = if r.checks.iter().all(|c| c.passed) {
        "pass"
    } else {
        "fail"
    };
    assert_eq!(json["verdict"], expected);
    assert_eq!(r.verdict == Verdict::Pass, expected == "pass");
}

#[test]
fn uniform_ratio_stays_bounded_along_paths() {
    let r = run(
        "experiment = rate_uniform_as\nmodel.family = ar1\nmodel.phi = 0.2\nkernel = epanechnikov\n\
         bandwidth.delta = 0.3\nn_list = 2^10, 2^11, 2^12, 2^13, 2^14\nreplicates = 4\nseed = 5\n",
    );
    let ratios = r.summary.column("ratio").unwrap();
    assert_eq!(ratios.len(), 4 * 5);
    assert!(
        ratios.iter().all(|&q| q.is_finite() && q > 0.1 && q < 10.0),
        "{ratios:?}"
    );
    let paths = &r.extra_tables.iter().find(|t| t.name == "paths").unwrap().table;
    assert!(paths.column("max_over_median").unwrap().iter().all(|&v| v < 3.0));
    // the discretization bound is reported next to every sup
    let disc = r.summary.column("discretization_bound").unwrap();
    assert!(disc.iter().all(|&d| d > 0.0));
}
