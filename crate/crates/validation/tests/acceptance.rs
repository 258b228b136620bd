//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Thresholds live in the experiment
//! drivers (`mixkde::experiments`) and in the constants below.

use std::process::ExitCode;
use std::time::Instant;

use mixkde::blocking::{block_sizes, build_partition};
use mixkde::estimator::{binning_error_bound, cdf_estimate, density_estimate, sup_deviation};
use mixkde::rng::Stream;
use mixkde::{run_experiment, ExperimentConfig, ExperimentReport, Grid, KernelSpec, ProcessModel, Strategy};

const SEED: u64 = 20261014;

/// Random Direct-vs-Binned configurations drawn for criterion 10.
const ORACLE_CONFIGS: usize = 100;

/// Floating-point slack added to every rigorous bound in criterion 10.
const FLOAT_SLACK: f64 = 1e-12;

/// Largest allowed |slope(IID) − slope(AR1)| in criterion 3.
const RATE_SLOPE_GAP: f64 = 0.1;

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = fn() -> Result<Outcome, String>;

/// (family, p, fitted slope) per run.
type Slopes = Vec<(String, u32, f64)>;

fn run(text: &str) -> Result<ExperimentReport, String> {
    let cfg = ExperimentConfig::parse(text).map_err(|e| e.to_string())?;
    run_experiment(&cfg).map_err(|e| e.to_string())
}

fn checks_line(r: &ExperimentReport) -> String {
    r.checks
        .iter()
        .map(|c| {
            let op = if c.passed { "ok" } else { "FAILED" };
            format!("{}={:.4} {}", c.name, c.value, op)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion_1() -> Result<Outcome, String> {
    let r = run(&format!(
        "experiment = clt_density\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = gaussian\n\
         bandwidth.delta = 0.2\nn_list = 10^4\nreplicates = 2000\neval_points = -1, 0, 1\nseed = {SEED}\n"
    ))?;
    Ok(Outcome {
        passed: r.passed(),
        detail: format!("density CLT, AR1 phi=0.5: {}", checks_line(&r)),
    })
}

fn criterion_2() -> Result<Outcome, String> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (kind, delta) in [("clt_cdf_centered", 0.2), ("clt_cdf_true", 0.6)] {
        let r = run(&format!(
            "experiment = {kind}\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = epanechnikov\n\
             bandwidth.delta = {delta}\nn_list = 10^4\nreplicates = 2000\neval_points = 0.5\nseed = {SEED}\n"
        ))?;
        passed &= r.passed();
        parts.push(format!("{kind} delta={delta}: {}", checks_line(&r)));
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
    })
}

fn rate_slopes(kind: &str) -> Result<(bool, Slopes, String), String> {
    let mut passed = true;
    let mut slopes = Vec::new();
    let mut parts = Vec::new();
    for p in [2u32, 4] {
        for model in ["model.family = iid", "model.family = ar1\nmodel.phi = 0.5"] {
            let r = run(&format!(
                "experiment = {kind}\n{model}\nkernel = epanechnikov\nbandwidth.delta = 0.2\n\
                 n_list = 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072\nreplicates = 500\n\
                 eval_points = -1, 0, 1\np = {p}\nseed = {SEED}\n"
            ))?;
            let fit = r.fit.ok_or("rate report has no fit")?;
            let family = r.config["model.family"].clone();
            passed &= r.passed();
            parts.push(format!("{family} p={p} slope={:.4} ({})", fit.slope, checks_line(&r)));
            slopes.push((family, p, fit.slope));
        }
    }
    Ok((passed, slopes, parts.join("; ")))
}

fn criterion_3() -> Result<Outcome, String> {
    let (mut passed, slopes, detail) = rate_slopes("rate_sup_lp")?;
    let mut gaps = Vec::new();
    for p in [2u32, 4] {
        let pick = |fam: &str| slopes.iter().find(|s| s.0 == fam && s.1 == p).map(|s| s.2);
        let gap = (pick("iid").unwrap() - pick("ar1").unwrap()).abs();
        passed &= gap <= RATE_SLOPE_GAP;
        gaps.push(format!("gap p={p} {gap:.4}"));
    }
    Ok(Outcome {
        passed,
        detail: format!("{detail}; {}", gaps.join(", ")),
    })
}

fn criterion_4() -> Result<Outcome, String> {
    let (passed, _, detail) = rate_slopes("rate_integral_lp")?;
    Ok(Outcome { passed, detail })
}

fn uniform(domain: &str) -> Result<Outcome, String> {
    let r = run(&format!(
        "experiment = rate_uniform_as\nmodel.family = ar1\nmodel.phi = 0.2\nkernel = epanechnikov\n\
         bandwidth.delta = 0.3\nn_list = 2^12, 2^13, 2^14, 2^15, 2^16, 2^17, 2^18, 2^19, 2^20\n\
         grid.lo = -2\ngrid.hi = 2\ngrid.m = 401\nreplicates = 20\nsup_domain = {domain}\nseed = {SEED}\n"
    ))?;
    let paths = r
        .extra_tables
        .iter()
        .find(|t| t.name == "paths")
        .ok_or("uniform report has no paths table")?;
    let worst = paths.table.column("max_over_median").unwrap_or_default();
    let worst = worst.iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        passed: r.passed(),
        detail: format!("{domain}: {}, worst max/median {worst:.3}", checks_line(&r)),
    })
}

fn criterion_5() -> Result<Outcome, String> {
    uniform("compact")
}

fn criterion_6() -> Result<Outcome, String> {
    uniform("whole_line")
}

fn criterion_7() -> Result<Outcome, String> {
    let ns: Vec<String> = (2..=21).map(|e| format!("2^{e}")).collect();
    let xs: Vec<String> = (0..20).map(|i| format!("{}", -2.0 + 4.0 * i as f64 / 19.0)).collect();
    let mut passed = true;
    let mut parts = Vec::new();
    for kernel in ["gaussian", "epanechnikov", "triangular", "uniform"] {
        let r = run(&format!(
            "experiment = bias\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = {kernel}\n\
             bandwidth.delta = 0.25\nn_list = {}\neval_points = {}\nseed = {SEED}\n",
            ns.join(","),
            xs.join(",")
        ))?;
        passed &= r.passed();
        parts.push(format!("{kernel}: {}", checks_line(&r)));
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
    })
}

fn criterion_8() -> Result<Outcome, String> {
    let mut cases = 0;
    let mut failures = Vec::new();
    for alpha in [0.4, 0.6, 0.8] {
        for beta in [0.1, 0.2, alpha / 2.0] {
            for k in 4..=20u32 {
                cases += 1;
                if let Err(msg) = check_partition(k, alpha, beta) {
                    failures.push(format!("k={k} alpha={alpha} beta={beta}: {msg}"));
                }
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{} of {cases} (k, alpha, beta) cases pass{}",
            cases - failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    })
}

fn check_partition(k: u32, alpha: f64, beta: f64) -> Result<(), String> {
    let p = (2f64.powf(alpha * k as f64) + 1e-9).floor() as u64;
    let q = (2f64.powf(beta * k as f64) + 1e-9).floor() as u64;
    let level = 1u64 << k;
    if block_sizes(k, alpha, beta) != (p, q, level / (p + q)) {
        return Err("block sizes disagree with floor(2^(alpha k)), floor(2^(beta k))".into());
    }
    let part = match build_partition(k, alpha, beta) {
        Ok(part) => part,
        Err(e) if p + q >= level => {
            return if e.to_string().contains("too small") {
                Ok(())
            } else {
                Err(e.to_string())
            }
        }
        Err(e) => return Err(e.to_string()),
    };
    let r = level / (p + q);
    if part.big_blocks.len() as u64 != r || part.small_blocks.len() as u64 != r + 1 {
        return Err("block counts".into());
    }
    if part.big_blocks.iter().any(|b| b.len() != p) || part.small_blocks[..r as usize].iter().any(|b| b.len() != q) {
        return Err("block lengths".into());
    }
    let mut cursor = level;
    for (_, _, b) in part.ordered_blocks() {
        if b.start != cursor {
            return Err(format!("gap or overlap at {cursor}"));
        }
        cursor = b.end;
    }
    if cursor != 2 * level {
        return Err(format!("blocks end at {cursor}, not 2^(k+1)"));
    }
    if part.tail().len() >= p + q {
        return Err("tail block holds a whole big/small pair".into());
    }
    let k0 = part.bracket_from_k.ok_or("r_k never settles into the bracket")?;
    let target = 2f64.powf((1.0 - alpha) * k as f64);
    let inside = 0.5 * target <= r as f64 && r as f64 <= 2.0 * target;
    if k >= k0 && !inside {
        return Err(format!(
            "r_k = {r} outside [1/2, 2]·{target:.2} although k >= k0 = {k0}"
        ));
    }
    Ok(())
}

fn criterion_9() -> Result<Outcome, String> {
    let mut passed = true;
    let mut parts = Vec::new();
    for p in [2, 4] {
        for model in ["model.family = ar1\nmodel.phi = 0.25", "model.family = iid"] {
            let r = run(&format!(
                "experiment = moment_bound\n{model}\np = {p}\nreplicates = 1000\nblocking.alpha = 0.3\n\
                 blocking.beta = 0.08\nblocking.k_list = 6,7,8,9,10,11,12\nseed = {SEED}\n"
            ))?;
            passed &= r.passed();
            parts.push(format!("{} p={p}: {}", r.config["model.family"], checks_line(&r)));
        }
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
    })
}

fn lipschitz_kernel(stream: &mut Stream) -> KernelSpec {
    match (stream.uniform() * 3.0) as usize {
        0 => KernelSpec::gaussian(),
        1 => KernelSpec::epanechnikov(),
        _ => KernelSpec::triangular(),
    }
}

fn criterion_10() -> Result<Outcome, String> {
    let mut stream = Stream::new(SEED);
    let mut worst_binned = 0.0f64;
    let mut worst_cdf = 0.0f64;
    let mut worst_mass = 0.0f64;
    let mut failures = Vec::new();
    for c in 0..ORACLE_CONFIGS {
        let kernel = lipschitz_kernel(&mut stream);
        let sd = 0.5 + 1.5 * stream.uniform();
        let model = if stream.uniform() < 0.3 {
            ProcessModel::iid(sd)
        } else {
            ProcessModel::ar1(1.8 * stream.uniform() - 0.9, sd)
        }
        .map_err(|e| e.to_string())?;
        let n = 20 + (stream.uniform() * 3000.0) as usize;
        let h = 0.05 + 0.95 * stream.uniform();
        let m = 200 + (stream.uniform() * 3800.0) as usize;
        let path = model
            .generate_path(n, mixkde::rng::replicate_seed(SEED, c as u64))
            .map_err(|e| e.to_string())?;
        let x = path.values();
        let (lo, hi) = x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let reach = kernel.effective_radius() * h;
        let pad = stream.uniform() * model.marginal_sd();
        let grid = Grid::new(lo - reach - pad, hi + reach + pad, m).map_err(|e| e.to_string())?;
        let delta = grid.spacing();

        let direct = density_estimate(x, &kernel, h, &grid, Strategy::Direct).map_err(|e| e.to_string())?;
        let binned = density_estimate(x, &kernel, h, &grid, Strategy::Binned).map_err(|e| e.to_string())?;
        let gap = sup_deviation(&direct, &binned).map_err(|e| e.to_string())?;
        let bound = binning_error_bound(&kernel, h, delta).ok_or("Lipschitz kernel without a bound")?;
        worst_binned = worst_binned.max(gap / bound);
        if gap > bound + FLOAT_SLACK {
            failures.push(format!("config {c}: binned gap {gap:e} > bound {bound:e}"));
        }

        // trapezoid error per cell is at most spacing·oscillation, and the
        // total variation of f_n is at most 2 K(0) / h for unimodal kernels
        let variation_tol = 2.0 * kernel.evaluate(0.0) * delta / h + FLOAT_SLACK;
        let cdf = cdf_estimate(x, &kernel, h, &grid).map_err(|e| e.to_string())?;
        let running = direct.cumulative_integral();
        let cdf_gap = cdf
            .values()
            .iter()
            .zip(&running)
            .map(|(f, r)| (f - cdf.values()[0] - r).abs())
            .fold(0.0, f64::max);
        worst_cdf = worst_cdf.max(cdf_gap / variation_tol);
        if cdf_gap > variation_tol {
            failures.push(format!("config {c}: cdf vs trapezoid {cdf_gap:e} > {variation_tol:e}"));
        }
        let mass_gap = (direct.integral() - 1.0).abs();
        worst_mass = worst_mass.max(mass_gap / variation_tol);
        if mass_gap > variation_tol {
            failures.push(format!("config {c}: mass off by {mass_gap:e}"));
        }
    }

    let det = determinism()?;
    if let Some(msg) = &det {
        failures.push(msg.clone());
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "{ORACLE_CONFIGS} configs, worst gap/bound: binned {worst_binned:.3}, cdf {worst_cdf:.3}, mass {worst_mass:.3}; \
             determinism {}{}",
            if det.is_none() { "ok" } else { "FAILED" },
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    })
}

/// Byte-identical reports across reruns and across 1- and 4-thread pools.
fn determinism() -> Result<Option<String>, String> {
    let configs = [
        format!(
            "experiment = clt_density\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = epanechnikov\n\
             bandwidth.delta = 0.3\nn_list = 500, 2000\nreplicates = 300\neval_points = -0.5, 0.5\nseed = {SEED}\n"
        ),
        format!(
            "experiment = rate_integral_lp\nmodel.family = ar1\nmodel.phi = 0.5\nkernel = triangular\n\
             bandwidth.delta = 0.2\nn_list = 256, 512, 1024\nreplicates = 50\np = 4\nseed = {SEED}\n"
        ),
        format!(
            "experiment = rate_uniform_as\nmodel.family = ar1\nmodel.phi = 0.2\nkernel = epanechnikov\n\
             bandwidth.delta = 0.3\nn_list = 2^10, 2^11, 2^12\nreplicates = 3\nseed = {SEED}\n"
        ),
    ];
    for text in &configs {
        let mut outputs = Vec::new();
        for threads in [1, 4, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| e.to_string())?;
            outputs.push(pool.install(|| run(text))?.to_json());
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            let kind = text.lines().next().unwrap_or_default();
            return Ok(Some(format!("reports differ across runs for {kind}")));
        }
    }
    Ok(None)
}

fn main() -> ExitCode {
    let criteria: [(u32, Criterion); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, f) in criteria {
        let started = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!("error: {e}"),
        });
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {id}: {tag} ({:.1}s) {}",
            started.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.passed {
            failed.push(id.to_string());
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of 10 criteria fail ({})",
            failed.len(),
            failed.join(", ")
        );
        ExitCode::FAILURE
    }
}
