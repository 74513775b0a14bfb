use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use floquet_ciss::config::ExperimentConfig;
use floquet_ciss::experiment::{exit_code, Experiment};
use floquet_ciss::Error;

/// Floquet friction, nuclear Langevin dynamics and spin-resolved transport.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `dynamics.master_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Rebuild cached field files.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate friction fields and heat maps for both spin species.
    Fields,
    /// Bias sweep: kinetic energy, spin currents and polarization.
    Sweep,
    /// Steady-state positions, separation and angular momentum.
    Steady,
    /// Property suite; exits with status 1 on any failed check.
    Validate,
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config {
                key: "--threads".into(),
                reason: e.to_string(),
            })?;
    }
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let mut exp = Experiment::new(config).forced(cli.force);
    if let Some(out) = cli.out {
        exp = exp.with_out(out);
    }
    if let Some(seed) = cli.seed {
        exp = exp.with_seed(seed);
    }
    match cli.command {
        Command::Fields => {
            let r = exp.fields()?;
            if r.up_to_date {
                eprintln!("up-to-date");
            }
            json(&r);
        }
        Command::Sweep => json(&exp.sweep()?),
        Command::Steady => json(&exp.steady()?),
        Command::Validate => {
            let r = exp.validate()?;
            json(&r);
            return Ok(r.passed);
        }
    }
    Ok(true)
}

fn json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
