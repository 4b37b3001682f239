mod args;
mod commands;
mod run;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};

use crate::args::Cli;
use crate::run::{CliError, Context};

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    match real_main(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_line());
            ExitCode::from(e.code())
        }
    }
}

fn real_main(argv: Vec<OsString>) -> Result<(), CliError> {
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(first_line(&e.to_string()))),
    };
    let argv = apply_config(argv, &matches)?;
    let matches = Cli::command()
        .try_get_matches_from(&argv)
        .map_err(|e| CliError::Usage(first_line(&e.to_string())))?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(first_line(&e.to_string())))?;

    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Compute(e.to_string()))?;
    }
    let ctx = Context::new(&argv, &cli.global);
    commands::dispatch(cli.command, ctx)
}

fn first_line(s: &str) -> String {
    s.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("usage error")
        .trim_start_matches("error: ")
        .to_string()
}

/// Appends config-file values for every option not given on the command
/// line, so flags override the file and the file overrides defaults.
fn apply_config(mut argv: Vec<OsString>, matches: &ArgMatches) -> Result<Vec<OsString>, CliError> {
    let Some(path) = matches.get_one::<std::path::PathBuf>("config") else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    let doc: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config is not a JSON object: {e}")))?;

    let root = Cli::command();
    let mut cmd = &root;
    let mut leaf = matches;
    while let Some((name, sub)) = leaf.subcommand() {
        cmd = cmd.find_subcommand(name).expect("matched subcommand exists");
        leaf = sub;
    }
    for (key, value) in doc {
        let long = key.replace('_', "-");
        if long == "config" {
            continue;
        }
        let arg = cmd
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(long.as_str()))
            .ok_or_else(|| CliError::Input(format!("unknown config key {key:?}")))?;
        let id = arg.get_id().as_str();
        let from_cli = |m: &ArgMatches| matches!(m.try_get_raw(id), Ok(Some(_))) && m.value_source(id) == Some(ValueSource::CommandLine);
        if from_cli(leaf) || from_cli(matches) {
            continue;
        }
        let flag = OsString::from(format!("--{long}"));
        let scalar = |v: &serde_json::Value| -> Result<String, CliError> {
            match v {
                serde_json::Value::String(s) => Ok(s.clone()),
                serde_json::Value::Number(n) => Ok(n.to_string()),
                serde_json::Value::Bool(b) => Ok(b.to_string()),
                _ => Err(CliError::Input(format!("config key {key:?} has an unsupported value"))),
            }
        };
        match &value {
            serde_json::Value::Bool(true) => argv.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                for v in items {
                    argv.push(flag.clone());
                    argv.push(scalar(v)?.into());
                }
            }
            v => {
                argv.push(flag);
                argv.push(scalar(v)?.into());
            }
        }
    }
    Ok(argv)
}
