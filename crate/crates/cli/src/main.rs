//! `cvtomo`: design, simulate, reconstruct, benchmark, verify and scan.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 configuration error,
//! 3 optimizer failure, 4 informationally incomplete measurement.

mod commands;
mod config;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cvtomo::Error;

#[derive(Parser, Debug)]
#[command(name = "cvtomo", version, about = "Displaced excitation-counting tomography toolkit")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "CVTOMO_THREADS")]
    threads: Option<usize>,
    /// Run the command described in a JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Choose displacements: ring radius scans, gradient optimization, greedy selection
    Design(commands::DesignArgs),
    /// Sample a measurement record for a known state
    Simulate(commands::SimulateArgs),
    /// Estimate the density matrix from a record
    Reconstruct(commands::ReconstructArgs),
    /// Wigner lattice vs optimized excitation counting under shot noise
    Benchmark(commands::BenchmarkArgs),
    /// Run the numerical checks
    Verify(commands::VerifyArgs),
    /// κ, estimate and Fisher maps over single displacements for a cat basis
    Scan(commands::ScanArgs),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InformationallyIncomplete { .. } | Error::InsufficientSettings { .. } => 4,
        Error::Optimizer(_) | Error::DegenerateSpectrum { .. } | Error::BudgetExceeded { .. } => 3,
        _ => 2,
    }
}

fn parse_cli() -> Result<Cli, Error> {
    let cli = Cli::parse();
    let Some(path) = &cli.config else {
        return Ok(cli);
    };
    if cli.command.is_some() {
        return Err(Error::Config("--config replaces the subcommand; give one or the other".into()));
    }
    let cfg: config::RunConfig = cvtomo::io::read_json(path)?;
    let mut argv = vec!["cvtomo".to_string()];
    argv.extend(cfg.to_argv()?);
    if let Some(t) = cli.threads {
        argv.extend(["--threads".into(), t.to_string()]);
    }
    Ok(Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit()))
}

fn run() -> Result<bool, Error> {
    let cli = parse_cli()?;
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let Some(command) = cli.command else {
        return Err(Error::Config("no command given (see --help)".into()));
    };
    match command {
        Command::Design(a) => commands::run_design(&a)?,
        Command::Simulate(a) => commands::run_simulate(&a)?,
        Command::Reconstruct(a) => commands::run_reconstruct(&a)?,
        Command::Benchmark(a) => commands::run_benchmark_cmd(&a)?,
        Command::Verify(a) => return commands::run_verify_cmd(&a),
        Command::Scan(a) => commands::run_scan(&a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        use super::{exit_code, Error};
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Optimizer("x".into())), 3);
        assert_eq!(exit_code(&Error::InformationallyIncomplete { rank: 3, dimension: 4 }), 4);
    }
}
