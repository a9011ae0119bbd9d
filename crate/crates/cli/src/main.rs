//! `phasecs`: run phase-sparse compressive-sampling scenarios.

mod artifacts;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phasecs::experiment::{run_trial, sweep};
use phasecs::scenario::{BuiltScenario, Scenario, SweepConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("solver did not reach the residual budget: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phasecs", version, about = "Phase-sparse compressive sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory (default: the scenario's output_dir, else out/<name>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed overriding the file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario end to end and write its tables and metrics.
    Run { scenario: PathBuf },
    /// Run a measurement sweep and write its success-rate table.
    Sweep { sweep: PathBuf },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path, seed: Option<u64>) -> Result<BuiltScenario, CliError> {
    let text = read(path)?;
    let mut scenario = Scenario::from_toml_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if scenario.name.is_empty() {
        scenario.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
    }
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(dir) = &scenario.output_dir {
        if dir.is_relative() {
            scenario.output_dir = Some(path.parent().unwrap_or(Path::new(".")).join(dir));
        }
    }
    scenario
        .build()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn output_dir(common: &Common, built: &BuiltScenario) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| built.scenario.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(&built.scenario.name))
}

fn run(path: &Path, common: &Common) -> Result<(), CliError> {
    let built = load(path, common.seed)?;
    let outcome = run_trial(&built, built.measurements, built.scenario.seed)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let dir = output_dir(common, &built);
    artifacts::write_run(&dir, &built, &outcome)?;
    if !common.quiet {
        for (i, s) in outcome.signals.iter().enumerate() {
            println!(
                "{} signal {i}: SER {} NMSE {:.3e} λ0 {:.4} η {:.4}{}",
                built.scenario.name,
                s.frame.ser,
                s.frame.nmse,
                s.frame.lambda0,
                s.frame.eta,
                s.rotation.map_or(String::new(), |r| format!(" rotation {r:.4} rad")),
            );
        }
        println!(
            "{} iterations, residual {:.3e} (budget {:.3e}), {:.2} s; artifacts in {}",
            outcome.iterations,
            outcome.residual_norm,
            outcome.epsilon,
            outcome.runtime.as_secs_f64(),
            dir.display()
        );
    }
    if !outcome.converged {
        return Err(CliError::NonConvergence(format!(
            "residual {:.3e} > budget {:.3e} after {} iterations",
            outcome.residual_norm, outcome.epsilon, outcome.iterations
        )));
    }
    Ok(())
}

fn run_sweep(path: &Path, common: &Common) -> Result<(), CliError> {
    let cfg = SweepConfig::from_toml_str(&read(path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let grid = cfg
        .grid()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let first_seed = common.seed.unwrap_or(cfg.first_seed);
    let mut rows = Vec::new();
    for scenario in &cfg.scenarios {
        let built = load(&base.join(scenario), None)?;
        rows.extend(
            sweep(&built, &grid, first_seed, cfg.seeds)
                .map_err(|e| CliError::Validation(format!("{}: {e}", scenario.display())))?,
        );
    }
    let dir = common.out.clone().unwrap_or_else(|| {
        Path::new("out").join(path.file_stem().unwrap_or_default())
    });
    let table = artifacts::write_sweep(&dir, &rows)?;
    if !common.quiet {
        print!("{}", artifacts::sweep_csv(&rows));
        println!("table written to {}", table.display());
    }
    let unconverged: usize = rows.iter().map(|r| r.trials - r.converged).sum();
    if unconverged > 0 {
        return Err(CliError::NonConvergence(format!("{unconverged} trials")));
    }
    Ok(())
}

fn validate(path: &Path, common: &Common) -> Result<(), CliError> {
    let built = load(path, common.seed)?;
    if !common.quiet {
        println!(
            "{}: ok, {} signal(s), N = {}, K = {}, η = {:.4}",
            built.scenario.name,
            built.signals.len(),
            built.frame_len,
            built.measurements,
            built.measurements as f64 / built.frame_len as f64
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario } => run(scenario, &cli.common),
        Command::Sweep { sweep } => run_sweep(sweep, &cli.common),
        Command::Validate { scenario } => validate(scenario, &cli.common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
