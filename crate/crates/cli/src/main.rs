//! `mixkde` command-line front end.
//!
//! Exit codes: 0 verdict pass (or validation/partition success), 1 I/O or
//! parse error, 2 hypothesis gate or invalid parameters, 3 verdict fail.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use mixkde::blocking::build_partition;
use mixkde::experiments::gates::{hypotheses, GateStatus};
use mixkde::experiments::report::to_json_string;
use mixkde::{run_experiment, Error, ExperimentConfig, ExperimentReport};
use serde::Serialize;

const EXIT_PASS: u8 = 0;
const EXIT_IO_OR_PARSE: u8 = 1;
const EXIT_GATE: u8 = 2;
const EXIT_VERDICT_FAIL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mixkde",
    version,
    about = "Kernel density experiments for rho-mixing sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write its report into OUT.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 picks one per core.
        #[arg(long, env = "MIXKDE_THREADS", default_value_t = 0)]
        threads: usize,
    },
    /// Parse the config and check every hypothesis without running.
    Validate { config: PathBuf },
    /// Write the block partition of [2^k, 2^(k+1)) as CSV.
    Partition {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct RunManifest {
    config_path: String,
    config: std::collections::BTreeMap<String, String>,
    out_dir: String,
    version: String,
    duration_seconds: f64,
    verdict: mixkde::Verdict,
    files: Vec<String>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Gate(_) | Error::InvalidParameter(_) => EXIT_GATE,
        _ => EXIT_IO_OR_PARSE,
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("mixkde: {err}");
    ExitCode::from(exit_code_for(err))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn csv_bytes(table: &mixkde::experiments::Table) -> Vec<u8> {
    let mut buf = Vec::new();
    table.write_csv(&mut buf).expect("writing to a Vec cannot fail");
    buf
}

fn write_outputs(report: &ExperimentReport, out: &Path) -> Result<Vec<String>, Error> {
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let mut files = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<(), Error> {
        write_file(&out.join(&name), &bytes)?;
        files.push(name);
        Ok(())
    };
    put("report.json".into(), report.to_json().into_bytes())?;
    put("summary.csv".into(), csv_bytes(&report.summary))?;
    for t in &report.extra_tables {
        put(format!("{}.csv", t.name), csv_bytes(&t.table))?;
    }
    put("plotdata.csv".into(), csv_bytes(&report.plot))?;
    Ok(files)
}

fn cmd_run(config: &Path, out: &Path, threads: usize) -> ExitCode {
    let started = Instant::now();
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(&Error::Io(format!("thread pool: {e}"))),
    };
    let report = match pool.install(|| run_experiment(&cfg)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let mut files = match write_outputs(&report, out) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    files.push("manifest.json".into());
    let manifest = RunManifest {
        config_path: config.display().to_string(),
        config: cfg.echo(),
        out_dir: out.display().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: started.elapsed().as_secs_f64(),
        verdict: report.verdict,
        files,
    };
    if let Err(e) = write_file(&out.join("manifest.json"), to_json_string(&manifest).as_bytes()) {
        return fail(&e);
    }
    for c in &report.checks {
        let mark = if c.passed { "ok " } else { "FAIL" };
        let cmp = match c.comparison {
            mixkde::experiments::report::Comparison::AtMost => "<=",
            mixkde::experiments::report::Comparison::AtLeast => ">=",
        };
        println!("{mark} {} = {:.6} ({cmp} {})", c.name, c.value, c.threshold);
    }
    if report.passed() {
        println!("verdict: pass");
        ExitCode::from(EXIT_PASS)
    } else {
        println!("verdict: fail");
        ExitCode::from(EXIT_VERDICT_FAIL)
    }
}

fn cmd_validate(config: &Path) -> ExitCode {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let hs = hypotheses(&cfg);
    for h in &hs {
        let status = match h.status {
            GateStatus::Enforced => "enforced",
            GateStatus::HoldsAnalytically => "analytic",
        };
        let verdict = if h.holds { "holds" } else { "FAILS" };
        println!("[{status}] ({}) {}: {verdict} - {}", h.id, h.statement, h.detail);
    }
    let failed: Vec<_> = hs.iter().filter(|h| !h.holds).collect();
    if failed.is_empty() {
        println!("all hypotheses hold for {}", cfg.kind);
        ExitCode::from(EXIT_PASS)
    } else {
        for h in failed {
            eprintln!("mixkde: hypothesis gate ({}) {}", h.id, h.detail);
        }
        ExitCode::from(EXIT_GATE)
    }
}

fn cmd_partition(k: u32, alpha: f64, beta: f64, out: &Path) -> ExitCode {
    let part = match build_partition(k, alpha, beta) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let mut buf = Vec::new();
    part.write_csv(&mut buf).expect("writing to a Vec cannot fail");
    if let Err(e) = write_file(out, &buf) {
        return fail(&e);
    }
    println!(
        "p_k = {}, q_k = {}, r_k = {}, tail = {}",
        part.p_k,
        part.q_k,
        part.r_k,
        part.tail().len()
    );
    ExitCode::from(EXIT_PASS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO_OR_PARSE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, out, threads } => cmd_run(&config, &out, threads),
        Command::Validate { config } => cmd_validate(&config),
        Command::Partition { k, alpha, beta, out } => cmd_partition(k, alpha, beta, &out),
    }
}
