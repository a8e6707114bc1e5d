//! Config files, report output and the commands of the `hofer` binary.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::Result;
use report::Output;

#[derive(Debug, Parser)]
#[command(
    name = "hofer",
    version,
    about = "Length spectrum experiments on surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub slabs: Option<usize>,
    /// Integrator step.
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Disk area.
    #[arg(long = "A", global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate the quasimorphism on the configured fields.
    Rho,
    /// Contour tree and median of one field.
    Reeb,
    /// Trajectories, energy and windings.
    Simulate,
    /// Build a pipe field, calibrate it and check the transport.
    Construct,
    /// Bounds on the length spectrum for a list of classes.
    Bounds,
    /// Run the acceptance suite.
    Verify,
}

/// Loads the config, applies the flags and runs the command. Returns the
/// files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        a: cli.a,
        s1: cli.s1,
        s2: cli.s2,
        grid: cli.grid,
        slabs: cli.slabs,
        step: cli.step,
    };
    let settings = cfg.settings(&overrides)?;
    let mut out = Output::create(&settings.out)?;
    let f = match cli.command {
        Command::Rho => commands::rho,
        Command::Reeb => commands::reeb,
        Command::Simulate => commands::simulate,
        Command::Construct => commands::construct,
        Command::Bounds => commands::bounds,
        Command::Verify => commands::verify,
    };
    f(&cfg, &settings, &mut out)?;
    Ok(out.written)
}
