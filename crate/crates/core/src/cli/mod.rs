//! Command-line front end: scenario loading, dispatch and exit codes.

pub mod commands;
pub mod presets;
pub mod scenario;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use commands::{run, Command, Context, Outcome};
pub use presets::{preset, PRESETS};
pub use scenario::ScenarioFile;

use crate::error::Error;
use crate::output::sha256_hex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable holding the worker count for parallel commands.
pub const THREADS_ENV: &str = "LIGHTLATTICE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Action {
    Fields,
    Forces,
    Relax,
    Evolve,
    Sweep,
    Design,
    Modes,
    Zerolines,
    /// Print a preset scenario (or list presets).
    Preset,
}

#[derive(Debug, Parser)]
#[command(name = "lightlattice", version, about = "Optical forces and self-ordering of beam-splitter chains")]
struct Args {
    #[arg(value_enum)]
    action: Action,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Built-in scenario instead of a file.
    #[arg(long)]
    preset: Option<String>,
}

fn command_of(a: Action) -> Option<Command> {
    Some(match a {
        Action::Fields => Command::Fields,
        Action::Forces => Command::Forces,
        Action::Relax => Command::Relax,
        Action::Evolve => Command::Evolve,
        Action::Sweep => Command::Sweep,
        Action::Design => Command::Design,
        Action::Modes => Command::Modes,
        Action::Zerolines => Command::Zerolines,
        Action::Preset => return None,
    })
}

/// Worker count from `LIGHTLATTICE_THREADS`; unset means all cores.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}

/// Reads and validates the scenario named by `--scenario` or `--preset`.
pub fn load(scenario: Option<&PathBuf>, preset_name: Option<&str>) -> Result<(ScenarioFile, String), Error> {
    match (scenario, preset_name) {
        (Some(_), Some(_)) => Err(Error::InvalidInput("give --scenario or --preset, not both".into())),
        (None, None) => Err(Error::InvalidInput("--scenario or --preset is required".into())),
        (Some(path), None) => {
            let bytes = std::fs::read(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::InvalidInput(format!("{} is not UTF-8", path.display())))?;
            Ok((ScenarioFile::from_json(text)?, sha256_hex(&bytes)))
        }
        (None, Some(name)) => {
            let s = preset(name)?;
            let hash = sha256_hex(s.to_json().as_bytes());
            Ok((s, hash))
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let Some(command) = command_of(args.action) else {
        return print_preset(args.preset.as_deref());
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    let (scenario, hash) = match load(args.scenario.as_ref(), args.preset.as_deref()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let ctx = Context {
        scenario,
        hash,
        threads,
    };
    log::info!("running {command} ({} threads)", threads.map_or("all".into(), |n| n.to_string()));
    let outcome = match run(command, &ctx) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match outcome.write(&ctx, &args.out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: writing outputs: {e}");
            return EXIT_INPUT;
        }
    }
    match &outcome.failure {
        Some(msg) => {
            eprintln!("error: {msg} (partial outputs written)");
            EXIT_NUMERICAL
        }
        None => EXIT_OK,
    }
}

fn print_preset(name: Option<&str>) -> i32 {
    match name {
        None => {
            for (n, cmd) in PRESETS {
                println!("{n}\t{cmd}");
            }
            EXIT_OK
        }
        Some(n) => match preset(n) {
            Ok(s) => {
                print!("{}", s.to_json());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
    }
}
