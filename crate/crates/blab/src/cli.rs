//! `blab <subcommand> [--config PATH] [--set section.key=value]... [--out DIR]
//! [--seed N] [--quiet]`
//!
//! Exit codes: 0 when no check is violated, 2 when some check is violated,
//! 1 on usage, configuration or runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::error::{BlabError, Result};
use crate::scenarios::{self, Report, Settings};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_VIOLATED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "blab", version, about = "Beltrami lab: constructions, inequality audits and a Beltrami solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (`[section]` headers and `key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override applied after the file, e.g. `cantor.stage=3`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory; shadows output.dir.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed; shadows scenario.seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Only errors and the final summary line.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Radial Cantor set construction: moments, certificates, inequalities, landslide, Hamilton sweep, solver.
    ConstructI,
    /// Deformation on a general set E: local extremality probes, landslide, Hamilton sweep, solver.
    ConstructIi,
    /// Randomized audit of the main inequalities and Lemma bounds.
    InequalityAudit,
    /// Stage intervals, exact measure and ring system.
    Cantor,
    /// Moment battery of the perturbations z^m on the Cantor set.
    Moments,
    /// Hamilton functional, delta and mass fraction along the kernel sweep.
    HamiltonSweep,
    /// One Beltrami solve with residual checks.
    Solve,
    /// Print the effective configuration.
    Config,
}

/// Resolved configuration: file, then `--set`, then the dedicated flags.
pub fn resolve(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for s in &cli.set {
        cfg.set(s)?;
    }
    if let Some(dir) = &cli.out {
        cfg.set(&format!("output.dir={}", dir.display()))?;
    }
    if let Some(seed) = cli.seed {
        cfg.set(&format!("scenario.seed={seed}"))?;
    }
    Ok(cfg)
}

pub fn run_command(command: Command, settings: &Settings) -> Result<Report> {
    match command {
        Command::ConstructI => scenarios::run_construction_i(settings),
        Command::ConstructIi => scenarios::run_construction_ii(settings),
        Command::InequalityAudit => scenarios::run_inequality_audit(settings),
        Command::Cantor => scenarios::run_cantor(settings),
        Command::Moments => scenarios::run_moments(settings),
        Command::HamiltonSweep => scenarios::run_hamilton_sweep(settings),
        Command::Solve => scenarios::run_solve(settings),
        Command::Config => unreachable!("handled before settings are built"),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    crate::init_threads()?;
    let cfg = resolve(cli)?;
    if cli.command == Command::Config {
        write!(out, "{cfg}")?;
        return Ok(EXIT_OK);
    }
    let settings = Settings::from_config(&cfg)?;
    let report = run_command(cli.command, &settings)?;
    let written = report.write(&settings.out_dir, settings.csv, settings.grid)?;
    if !cli.quiet {
        for line in &report.lines {
            writeln!(out, "{line}")?;
        }
        for c in report.checks.iter().filter(|c| c.status == scenarios::Status::Violated) {
            writeln!(out, "VIOLATED {} [{}]", c.id, c.claim)?;
        }
        for p in &written {
            writeln!(out, "wrote {}", p.display())?;
        }
    }
    writeln!(
        out,
        "{}: {} checks, {} holds, {} within error, {} violated, {} evidence, {} not applicable",
        report.scenario,
        report.checks.len(),
        report.count(scenarios::Status::Holds),
        report.count(scenarios::Status::HoldsWithinError),
        report.violations(),
        report.count(scenarios::Status::Evidence),
        report.count(scenarios::Status::NotApplicable),
    )?;
    Ok(if report.violations() > 0 { EXIT_VIOLATED } else { EXIT_OK })
}

/// Parses `args` (program name first), runs and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_ERROR
                }
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        // reader went away (e.g. `| head`); nothing left to report to
        Err(BlabError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "blab: {e}");
            if matches!(e, BlabError::Usage(_)) {
                let _ = writeln!(err, "run `blab --help` for usage");
            }
            EXIT_ERROR
        }
    }
}
