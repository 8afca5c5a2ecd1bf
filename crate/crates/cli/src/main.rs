//! `icofridge`: scenario runner for the SWITCH-based refrigeration
//! simulator. Every subcommand reads a TOML scenario config, emits a CSV
//! table (or its JSON mirror) and is deterministic for a fixed seed.

mod run;
mod table;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use icofridge::scenario::{parse_scenario, Scenario, ScenarioConfig};
use icofridge::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Parser)]
#[command(
    name = "icofridge",
    version,
    about = "Cooling with a quantum SWITCH of thermalizing channels",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Branch temperatures and plus probability over an input grid
    Sweep(CommonArgs),
    /// All-plus cooling trajectory and its fixed point
    Trajectory(CommonArgs),
    /// Shot histogram of the 4-qubit SWITCH experiment
    Histogram(CommonArgs),
    /// Branch splitting of the two analytic noise models
    NoiseCompare(CommonArgs),
    /// Monte-Carlo refrigeration cycles with heat bookkeeping
    CycleMc(CommonArgs),
    /// Run the embedded consistency checks
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config file (TOML); its `kind` must match the subcommand
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the seed from the config file
    #[arg(long, value_name = "N", value_parser = seed_parser())]
    seed: Option<u64>,
    /// Write here instead of stdout; also overrides `out` in the config
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional config (kind = "verify"); the checks take no parameters
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N", value_parser = seed_parser())]
    seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Seeds live in config files too, and TOML integers are signed 64-bit.
fn seed_parser() -> clap::builder::RangedU64ValueParser {
    clap::value_parser!(u64).range(..=i64::MAX as u64)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(EXIT_CHECK_FAILED),
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    let (expected_kind, common) = match command {
        Command::Sweep(args) => ("sweep", args),
        Command::Trajectory(args) => ("trajectory", args),
        Command::Histogram(args) => ("histogram", args),
        Command::NoiseCompare(args) => ("noise_compare", args),
        Command::CycleMc(args) => ("cycle_mc", args),
        Command::Verify(args) => return execute_verify(args),
    };
    let text = read_config(&common.config)?;
    let cfg = parse_scenario(&text)?;
    if cfg.scenario.kind_name() != expected_kind {
        return Err(Error::InvalidScenario(format!(
            "config kind is \"{}\" but the subcommand expects \"{expected_kind}\"",
            cfg.scenario.kind_name()
        )));
    }
    let seed = cfg.resolve_seed(common.seed);
    let (table, _) = run::run_scenario(&cfg, seed)?;
    emit(&table, &common.out, cfg.out.as_deref(), common.format)?;
    Ok(ExitCode::SUCCESS)
}

fn execute_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let cfg = match &args.config {
        Some(path) => {
            let cfg = parse_scenario(&read_config(path)?)?;
            if cfg.scenario.kind_name() != "verify" {
                return Err(Error::InvalidScenario(format!(
                    "config kind is \"{}\" but the subcommand expects \"verify\"",
                    cfg.scenario.kind_name()
                )));
            }
            cfg
        }
        None => ScenarioConfig {
            scenario: Scenario::Verify,
            seed: None,
            out: None,
        },
    };
    let seed = cfg.resolve_seed(args.seed);
    let (table, all_ok) = run::run_scenario(&cfg, seed)?;
    emit(&table, &args.out, cfg.out.as_deref(), args.format)?;
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

/// An unreadable config is a usage problem (exit 2), unlike write
/// failures while emitting results (exit 1).
fn read_config(path: &std::path::Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| {
        Error::InvalidScenario(format!("cannot read config {}: {e}", path.display()))
    })
}

fn emit(
    table: &table::Table,
    flag_out: &Option<PathBuf>,
    config_out: Option<&str>,
    format: Format,
) -> Result<(), Error> {
    let rendered = match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    let target = flag_out
        .clone()
        .or_else(|| config_out.map(PathBuf::from));
    match target {
        Some(path) => fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}
