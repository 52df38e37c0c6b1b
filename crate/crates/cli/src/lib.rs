//! Command-line front end for the pairdyn experiments.

pub mod config;
pub mod csv;
pub mod error;
pub mod plot;
pub mod run;
pub mod verify;

use clap::{Parser, Subcommand};
use config::RunConfig;
use error::CliResult;
use run::Session;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "pairdyn",
    version,
    about = "Two-particle lattice dynamics experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file of flat key = value settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Free spreading of a double Gaussian pair.
    Free,
    /// Thermal mixtures of boosted pairs.
    Thermal,
    /// Phase scan of the interferometer.
    Mzi,
    /// Bloch oscillations in a linear tilt.
    Bloch,
    /// Invariant checks; nonzero exit if any fails.
    Verify,
    /// Free, thermal, interferometer and Bloch data sets.
    All,
}

/// Runs one command; the session holds the written paths and summary lines
/// even when a later stage fails.
pub fn execute(cli: Cli) -> (Session, CliResult<()>) {
    let cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(file) => file.merged(cli.overrides),
            Err(e) => return (Session::new(cli.overrides), Err(e)),
        },
        None => cli.overrides,
    };
    let mut session = Session::new(cfg);
    let outcome = match cli.command {
        Command::Free => session.free(),
        Command::Thermal => session.thermal(),
        Command::Mzi => session.mzi(),
        Command::Bloch => session.bloch(),
        Command::Verify => session.verify(),
        Command::All => session.all(),
    };
    (session, outcome)
}
