//! `phym`: reproducible experiments driven by a config file.
//!
//! Exit status: 0 when every in-run assertion passes, 1 when one fails,
//! 2 for an invalid config or invocation, 3 for numerical nonconvergence.

mod config;
mod experiments;
mod report;
mod verify;

use clap::Parser;
use experiments::{registry, Context, NAMES};
use phym::PhymError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use report::{Outcome, Report, Timings, SCHEMA};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Seed used by `verify` when neither the config nor the flags give one.
const VERIFY_DEFAULT_SEED: u64 = 0;

#[derive(Parser, Debug)]
#[command(name = "phym", version, about = "Hermitian Yang-Mills continuation experiments")]
struct Cli {
    /// Experiment to run; must agree with `experiment` in the config if both are set.
    #[arg(value_parser = NAMES)]
    experiment: Option<String>,
    /// Config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the report, CSV series and dumps.
    #[arg(long, default_value = "phym-out")]
    out: PathBuf,
    /// Seed of the single generator behind every randomized corpus.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; runs are single-threaded and deterministic, the value is recorded.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    /// Suppress the per-assertion summary.
    #[arg(long)]
    quiet: bool,
}

fn config_error(source: &str, line: Option<usize>, msg: impl std::fmt::Display) -> ExitCode {
    match line {
        Some(l) => eprintln!("phym: {source}:{l}: {msg}"),
        None => eprintln!("phym: {source}: {msg}"),
    }
    ExitCode::from(2)
}

fn exit_code(e: &PhymError) -> u8 {
    match e {
        PhymError::NonConvergence(_) | PhymError::Numeric(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let source = cli.config.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<default config>".into());
    let text = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => return config_error(&source, None, format!("cannot read: {e}")),
        },
        None => String::new(),
    };
    let mut cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => return config_error(&source, e.line, e.message),
    };
    if let Err(e) = cfg.validate(&text) {
        return config_error(&source, e.line, e.message);
    }

    let name = match (&cli.experiment, &cfg.experiment) {
        (Some(a), Some(b)) if a != b => {
            return config_error(&source, config::locate(&text, "experiment"), format!("experiment '{b}' conflicts with '{a}' on the command line"))
        }
        (Some(a), _) => a.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => return config_error(&source, None, "no experiment given (one of solve, donaldson, norms, decay, poincare, verify)"),
    };
    let mut experiments = registry();
    let Some(experiment) = experiments.remove(name.as_str()) else {
        return config_error(&source, config::locate(&text, "experiment"), format!("unknown experiment '{name}'"));
    };
    let seed = cli.seed.or(cfg.seed);
    let seed = match seed {
        Some(s) => Some(s),
        None if name == "verify" => Some(VERIFY_DEFAULT_SEED),
        None if experiment.randomized() => {
            return config_error(&source, None, format!("experiment '{name}' draws random corpora; set `seed` or pass --seed"))
        }
        None => None,
    };
    cfg.seed = seed;
    cfg.experiment = Some(name.clone());

    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("phym: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    let mut ctx = Context { cfg: cfg.clone(), out: cli.out.clone(), rng: ChaCha8Rng::seed_from_u64(seed.unwrap_or(0)) };
    let mut outcome = Outcome::default();
    let start = Instant::now();
    let result = experiment.run(&mut ctx, &mut outcome);
    let total_seconds = start.elapsed().as_secs_f64();

    let (code, error) = match &result {
        Ok(()) if outcome.passed() => (0u8, None),
        Ok(()) => (1, None),
        Err(e) => (exit_code(e), Some(e.to_string())),
    };
    let report = Report {
        schema: SCHEMA,
        experiment: &name,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        threads: cli.threads as usize,
        inputs: &cfg,
        timings: Timings { total_seconds },
        metrics: &outcome.metrics,
        assertions: &outcome.assertions,
        files: &outcome.files,
        passed: code == 0,
        exit_code: code as i32,
        error: error.clone(),
    };
    let path = cli.out.join("report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Err(e) = std::fs::write(&path, json + "\n") {
        eprintln!("phym: cannot write {}: {e}", path.display());
        return ExitCode::from(2);
    }

    if let Some(e) = &error {
        eprintln!("phym: {name}: {e}");
    }
    if !cli.quiet {
        for a in &outcome.assertions {
            let detail = match (a.value, a.limit) {
                (Some(v), Some(l)) => format!("{v:.3e} {} {l:.3e}", a.relation),
                _ => String::new(),
            };
            println!("{} {:<28} {detail}", if a.passed { "PASS" } else { "FAIL" }, a.name);
        }
        println!("phym {name}: {} (report {})", if code == 0 { "ok" } else { "failed" }, path.display());
    }
    ExitCode::from(code)
}
