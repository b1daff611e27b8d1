//! Config files are flat `key = value` lines using flag names (with or
//! without the leading `--`). `#` starts a comment line. File values are
//! spliced in ahead of the command-line flags, so the command line wins.

use std::ffi::OsString;
use std::fs;

use clap::Parser;

use crate::args::Cli;
use crate::CliError;

pub fn parse(argv: &[OsString]) -> Result<Cli, CliError> {
    let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
    let Some(path) = cli.command.common().config.clone() else {
        return Ok(cli);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let file_args = file_args(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    // argv[1] is the subcommand: there are no top-level flags besides help.
    let mut merged: Vec<OsString> = argv[..2].to_vec();
    merged.extend(file_args.into_iter().map(OsString::from));
    if let Err(e) = Cli::try_parse_from(&merged) {
        let first = e
            .to_string()
            .lines()
            .next()
            .unwrap_or_default()
            .trim_start_matches("error: ")
            .to_owned();
        return Err(CliError::Config(format!("{}: {first}", path.display())));
    }
    merged.extend(argv[2..].iter().cloned());
    Cli::try_parse_from(&merged).map_err(CliError::Usage)
}

fn file_args(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key {key:?}", i + 1));
        }
        out.push(format!("--{key}={}", value.trim()));
    }
    Ok(out)
}
