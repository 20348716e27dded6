//! Command-line front end for `wasserlim-core`.
//!
//! [`run_cli`] parses arguments, merges an optional JSON config file (explicit
//! flags win), validates numeric ranges and dispatches to a subcommand.
//! Exit status is 0 on success, 1 on domain errors (reported as one line of
//! JSON on stderr) and 2 on usage errors.

pub mod args;
pub mod commands;
pub mod emit;

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use args::{Cli, Command};
pub use commands::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid value for --{flag}: {message}")]
    Usage { flag: String, message: String },
    #[error("invalid {var}: {message}")]
    Environment { var: String, message: String },
    #[error(transparent)]
    Domain(#[from] wasserlim_core::Error),
}

impl CliError {
    pub fn usage(flag: &str, message: impl Into<String>) -> Self {
        CliError::Usage { flag: flag.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Environment { .. } => 2,
            CliError::Domain(_) => 1,
        }
    }

    /// Machine-readable report for domain errors, plain text for usage errors.
    pub fn report(&self) -> String {
        match self {
            CliError::Usage { .. } | CliError::Environment { .. } => format!("error: {self}"),
            CliError::Domain(e) => serde_json::json!({"error": e.kind(), "message": e.to_string()}).to_string(),
        }
    }
}

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::usage("config", "expected a JSON object")),
        Err(e) => Err(CliError::usage("config", e.to_string())),
    }
}

/// Fills flags left unset on the command line from `config`.
fn merge<T: Serialize + DeserializeOwned>(args: T, config: &Map<String, Value>) -> Result<T, CliError> {
    let Value::Object(mut fields) = serde_json::to_value(args).expect("flags serialise") else {
        unreachable!("flag structs serialise to objects")
    };
    let explicit = fields.clone();
    for (key, slot) in fields.iter_mut() {
        let Some(v) = config.get(key).filter(|_| slot.is_null()) else { continue };
        // check keys one at a time so a bad value is reported under its own flag
        let mut single = explicit.clone();
        single.insert(key.clone(), v.clone());
        if let Err(e) = serde_json::from_value::<T>(Value::Object(single)) {
            return Err(CliError::usage(key, format!("from config: {e}")));
        }
        *slot = v.clone();
    }
    Ok(serde_json::from_value(Value::Object(fields)).expect("every key checked"))
}

fn merged(command: Command, config: &Map<String, Value>) -> Result<Command, CliError> {
    Ok(match command {
        Command::Validate(a) => Command::Validate(merge(a, config)?),
        Command::Transport(a) => Command::Transport(merge(a, config)?),
        Command::Geodesic(a) => Command::Geodesic(merge(a, config)?),
        Command::Cd(a) => Command::Cd(merge(a, config)?),
        Command::Sequence(a) => Command::Sequence(merge(a, config)?),
        Command::Counterexample(a) => Command::Counterexample(merge(a, config)?),
        Command::Quantize(a) => Command::Quantize(merge(a, config)?),
    })
}

/// Parsed, merged and validated arguments.
pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let command = match &cli.config {
        Some(path) => merged(cli.command, &read_config(path)?)?,
        None => cli.command,
    };
    RunConfig::new(command, cli.verbose)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("WASSERLIM_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Environment {
            var: "WASSERLIM_THREADS".into(),
            message: format!("expected a positive integer, got {v:?}"),
        })?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the command line and returns the process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = init_threads().and_then(|_| resolve(cli)).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}
