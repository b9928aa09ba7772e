//! `mtfse`: configuration-driven experiment runner.
//!
//! Exit status: 0 on success, 1 on any error, 3 when the blow-up guard fires.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Writer;

#[derive(Parser, Debug)]
#[command(name = "mtfse", version, about = "Spectral Galerkin solver for the fractional Schrödinger equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for the output tables and the run sidecar.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one configuration to t_final.
    Solve(Common),
    /// Error against a large-N reference over sweep.n_values.
    ConvergeSpace(Common),
    /// Error against a time reference over sweep.tau_values.
    ConvergeTime(Common),
    /// Stability regions of Krogstad-P22 for stability.y_imag.
    Stability(Common),
    /// MTF versus mapped Chebyshev approximation of the initial data.
    ApproxCompare(Common),
    /// Chebyshev propagator against an eigendecomposition.
    ExpmBench(Common),
}

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    version: &'a str,
    threads: usize,
    status: String,
    elapsed_seconds: f64,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    run_meta: RunMeta<'a>,
}

fn write_sidecar(dir: &Path, cfg: &ExperimentConfig, meta: RunMeta) -> Result<(), CliError> {
    let mut text = cfg.to_toml();
    text.push('\n');
    text.push_str(&toml::to_string(&Sidecar { run_meta: meta }).expect("meta serializes"));
    output::write_file(&dir.join("run.toml"), &text)
}

fn run(
    name: &str,
    common: &Common,
    f: fn(&ExperimentConfig, &mut Writer) -> Result<Vec<String>, CliError>,
) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&common.config)?;
    if common.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = Writer::new(&common.out_dir);
    let start = Instant::now();
    let result = pool.install(|| f(&cfg, &mut out));
    let status = match &result {
        Ok(_) => "ok".to_string(),
        Err(e) => e.to_string(),
    };
    let meta = RunMeta {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        threads: common.threads,
        status,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        files: out.written.clone(),
    };
    write_sidecar(&common.out_dir, &cfg, meta)?;
    for line in result? {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(c) => run("solve", c, commands::solve),
        Command::ConvergeSpace(c) => run("converge-space", c, commands::converge_space),
        Command::ConvergeTime(c) => run("converge-time", c, commands::converge_time),
        Command::Stability(c) => run("stability", c, commands::stability),
        Command::ApproxCompare(c) => run("approx-compare", c, commands::approx_compare),
        Command::ExpmBench(c) => run("expm-bench", c, commands::expm_bench),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
