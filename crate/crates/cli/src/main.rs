//! `pomsim`: reproduce detection ratios, mutual-information tables, sweeps
//! and Monte Carlo intervals for trine and tetrad measurements.

mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use output::Format;

#[derive(Debug)]
pub struct CliError {
    kind: String,
    message: String,
}

impl CliError {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: message.into() }
    }

    pub fn csv(e: csv::Error) -> Self {
        Self::new("csv", e.to_string())
    }
}

impl From<pom_core::Error> for CliError {
    fn from(e: pom_core::Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error: {}: {one_line}", self.kind)
    }
}

#[derive(Parser, Debug)]
#[command(name = "pomsim", version, about = "Optimal polarization measurements: ratios, tables, sweeps, Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Settings,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Detector probabilities for every state of an ensemble sent through a network.
    Ratios,
    /// Ideal, noisy and best von Neumann mutual information for the four built-in ensembles.
    MiTable,
    /// WP5 angle sweep of the trine network, or a noise-parameter sweep.
    Sweep,
    /// Monte Carlo interval for the mutual information of a measured table.
    Montecarlo,
    /// Check ensemble, POM and network files.
    Validate,
    /// Waveplate angles that prepare a polarization state from |h⟩.
    Prepare,
}

/// Options shared by every command. Values given on the command line take
/// precedence over a `--config` TOML file with the same (snake_case) keys.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
struct Settings {
    /// TOML file with default values for any of these options.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Built-in ensemble label (trine, tetrad, antitrine, antitetrad) or JSON file.
    #[arg(long, global = true)]
    ensemble: Option<String>,
    /// Built-in network (trine, tetrad, splitter) or JSON file.
    #[arg(long, global = true)]
    network: Option<String>,
    /// JSON POM file (validate).
    #[arg(long, global = true)]
    pom: Option<PathBuf>,
    /// Noise parameter for both families (mi-table).
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Noise parameter for the trine family (mi-table, default 0.952).
    #[arg(long, global = true)]
    gamma_trine: Option<f64>,
    /// Noise parameter for the tetrad family (mi-table, default 0.964).
    #[arg(long, global = true)]
    gamma_tetrad: Option<f64>,
    /// Sweep kind: wp5 or gamma.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// WP5 offsets from the design angle in degrees, as lo:hi:step (default -10:10:0.5).
    #[arg(long, global = true, allow_hyphen_values = true)]
    range: Option<String>,
    /// Number of evenly spaced noise values on [0, 1] (gamma sweep, default 101).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Outcome count for the gamma sweep; defaults to the size of --ensemble.
    #[arg(long, global = true)]
    outcomes: Option<usize>,
    /// Measured-distribution CSV: header of detector names, one row per input state.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Half width of the uniform perturbation (default 0.025).
    #[arg(long, global = true)]
    half_width: Option<f64>,
    /// Monte Carlo trials (default 100000).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Seed for the Monte Carlo streams (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Lower percentile of the Monte Carlo interval (default 0.16).
    #[arg(long, global = true)]
    lower_percentile: Option<f64>,
    /// Upper percentile of the Monte Carlo interval (default 0.84).
    #[arg(long, global = true)]
    upper_percentile: Option<f64>,
    /// Target polar angle β in radians (prepare).
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Target relative phase γ in radians (prepare).
    #[arg(long, global = true, allow_hyphen_values = true)]
    phase: Option<f64>,
    /// Read --beta and --phase in degrees.
    #[arg(long, global = true)]
    #[serde(default)]
    degrees: bool,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format (csv or json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

impl Settings {
    /// Fills unset fields from `base`.
    fn over(self, base: Settings) -> Settings {
        Settings {
            config: self.config,
            ensemble: self.ensemble.or(base.ensemble),
            network: self.network.or(base.network),
            pom: self.pom.or(base.pom),
            gamma: self.gamma.or(base.gamma),
            gamma_trine: self.gamma_trine.or(base.gamma_trine),
            gamma_tetrad: self.gamma_tetrad.or(base.gamma_tetrad),
            sweep: self.sweep.or(base.sweep),
            range: self.range.or(base.range),
            samples: self.samples.or(base.samples),
            outcomes: self.outcomes.or(base.outcomes),
            input: self.input.or(base.input),
            half_width: self.half_width.or(base.half_width),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            lower_percentile: self.lower_percentile.or(base.lower_percentile),
            upper_percentile: self.upper_percentile.or(base.upper_percentile),
            beta: self.beta.or(base.beta),
            phase: self.phase.or(base.phase),
            degrees: self.degrees || base.degrees,
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}

fn load_config(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = match &cli.flags.config {
        Some(path) => {
            let base = load_config(path)?;
            cli.flags.over(base)
        }
        None => cli.flags,
    };
    match cli.command {
        Command::Ratios => commands::ratios(&settings),
        Command::MiTable => commands::mi_table(&settings),
        Command::Sweep => commands::sweep(&settings),
        Command::Montecarlo => commands::montecarlo(&settings),
        Command::Validate => commands::validate(&settings),
        Command::Prepare => commands::prepare(&settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::new("usage", first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
