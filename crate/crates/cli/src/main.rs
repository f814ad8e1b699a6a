//! `sepcont`: run approximation experiments from a config file and write
//! CSV/JSONL reports plus a `manifest.json` into the output directory.

mod commands;
mod config;
mod exit;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{ExperimentConfig, Overrides, DEFAULT_MAX_DEPTH};
use exit::{Failure, EXIT_CERTIFICATE};
use report::{sha256_hex, ReportDir, ReportFile};

#[derive(Parser, Debug)]
#[command(name = "sepcont", version, about = "Approximation experiments for separately continuous group-valued functions")]
struct Cli {
    /// Experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `grid_depth` from the config.
    #[arg(long, global = true)]
    grid_depth: Option<usize>,
    /// Seed for random probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build and verify the separated nets.
    Nets,
    /// Discrete-valued approximation and convergence certificates.
    ApproxDiscrete,
    /// Quantizers, factors and the diagonal tower.
    ApproxZerodim,
    /// Ball membership queries from `[ball.*]` sections.
    Ball,
    /// Stagewise closure probe from the `[closure]` section.
    ClosureProbe,
    /// Uniform bound between the function and the `[problem3]` candidate.
    Problem3,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Nets => "nets",
            Command::ApproxDiscrete => "approx-discrete",
            Command::ApproxZerodim => "approx-zerodim",
            Command::Ball => "ball",
            Command::ClosureProbe => "closure-probe",
            Command::Problem3 => "problem3",
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    config: String,
    config_sha256: String,
    function: String,
    group: String,
    grid_depth: usize,
    n_max: usize,
    seed: u64,
    passed: bool,
    summary: Vec<(String, String)>,
    notes: Vec<String>,
    /// Wall-clock stage timings in milliseconds; not reproducible.
    timings_ms: Vec<(String, f64)>,
    reports: Vec<ReportFile>,
}

fn max_depth() -> Result<usize, Failure> {
    match std::env::var("SEPCONT_MAX_DEPTH") {
        Err(_) => Ok(DEFAULT_MAX_DEPTH),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("SEPCONT_MAX_DEPTH `{v}` is not a number"))),
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::config("--config is required"))?;
    let overrides = Overrides {
        grid_depth: cli.grid_depth,
        seed: cli.seed,
        max_depth: max_depth()?,
    };
    let (cfg, text) = ExperimentConfig::load(path, &overrides)?;
    let mut out = ReportDir::create(&cli.out)?;
    let outcome = match cli.command {
        Command::Nets => commands::nets(&cfg, &mut out),
        Command::ApproxDiscrete => commands::approx_discrete(&cfg, &mut out),
        Command::ApproxZerodim => commands::approx_zerodim(&cfg, &mut out),
        Command::Ball => commands::ball(&cfg, &mut out),
        Command::ClosureProbe => commands::closure(&cfg, &mut out),
        Command::Problem3 => commands::problem3(&cfg, &mut out),
    }?;
    let manifest = Manifest {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: path.display().to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        function: cfg.function_text.clone(),
        group: cfg.group.name(),
        grid_depth: cfg.grid_depth,
        n_max: cfg.n_max,
        seed: cli.seed,
        passed: outcome.passed,
        summary: outcome.summary,
        notes: outcome.notes,
        timings_ms: outcome.timings,
        reports: out.files.clone(),
    };
    out.json("manifest.json", &manifest)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: certificate check failed; see {}", cli.command.name(), cli.out.display());
            ExitCode::from(EXIT_CERTIFICATE)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
