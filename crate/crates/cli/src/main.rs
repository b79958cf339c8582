//! `spinclock` — batch front end for the clock-transition engine.
//!
//! Exit codes: 0 success, 2 configuration error (bad flags, malformed
//! JSON/CSV, missing files), 3 numerical failure (fit did not converge,
//! contract violation, resource cap).

mod commands;
mod config;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinclock_core::SpinError;

#[derive(Parser)]
#[command(
    name = "spinclock",
    about = "Spin-Hamiltonian thermodynamics, Monte Carlo and fitting for molecular clock transitions",
    version
)]
pub struct Cli {
    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    pub outdir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Energy levels of a preset or model at one field.
    Levels(commands::LevelsArgs),
    /// Specific heat c/R over a temperature grid.
    Heatcap(commands::HeatcapArgs),
    /// Magnetization isotherms M(H) at fixed temperatures.
    Magnetize(commands::MagnetizeArgs),
    /// Susceptibility (χT, χ or van Vleck χ_S) over temperature.
    Suscept(commands::SusceptArgs),
    /// Orientation-averaged observable for a powder/cone/crystal scheme.
    Powder(commands::PowderArgs),
    /// Metropolis Monte Carlo on an Ising lattice preset.
    Mc(commands::McArgs),
    /// Exact diagonalization of the coupled 6+1 spin cluster.
    Cluster(commands::ClusterArgs),
    /// Cole-Cole or T1 analysis of relaxation data.
    Relax(commands::RelaxArgs),
    /// Least-squares parameter fits (ZFS from powder M, axis angle, χT).
    Fit(commands::FitArgs),
    /// Clock-transition Rabi frequency.
    Rabi(commands::RabiArgs),
    /// Emit the simulated-curve CSVs behind the published figures.
    Reproduce(reproduce::ReproduceArgs),
    /// Run a JSON configuration file (RunConfig schema).
    Run(config::RunArgs),
}

fn exit_code_for(err: &SpinError) -> u8 {
    match err {
        SpinError::ParseError(_)
        | SpinError::Io(_)
        | SpinError::InvalidParameter(_)
        | SpinError::InvalidSpin(_) => 2,
        SpinError::ContractViolation(_)
        | SpinError::UnsupportedFormula(_)
        | SpinError::DomainError(_)
        | SpinError::ResourceLimit(_)
        | SpinError::SingularTerm { .. }
        | SpinError::FitFailure(_) => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("SPINCLOCK_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        } else {
            eprintln!("error: SPINCLOCK_THREADS must be a positive integer");
            return ExitCode::from(2);
        }
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Levels(args) => commands::levels(&cli.outdir, args),
        Command::Heatcap(args) => commands::heatcap(&cli.outdir, args),
        Command::Magnetize(args) => commands::magnetize(&cli.outdir, args),
        Command::Suscept(args) => commands::suscept(&cli.outdir, args),
        Command::Powder(args) => commands::powder(&cli.outdir, args),
        Command::Mc(args) => commands::mc(&cli.outdir, args),
        Command::Cluster(args) => commands::cluster(&cli.outdir, args),
        Command::Relax(args) => commands::relax(&cli.outdir, args),
        Command::Fit(args) => commands::fit(&cli.outdir, args),
        Command::Rabi(args) => commands::rabi(args),
        Command::Reproduce(args) => reproduce::run(&cli.outdir, args),
        Command::Run(args) => config::run(&cli.outdir, args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
