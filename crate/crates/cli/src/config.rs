//! `key=value` config files.
//!
//! Keys are long flag names without the dashes, plus `command` for the
//! subcommand. Blank lines and lines starting with `#` are skipped. The
//! comment header written at the top of every CSV is therefore a valid
//! config once the leading `# ` is removed.

use std::path::Path;

use crate::error::CliError;

pub const COMMANDS: [&str; 6] = ["simulate", "covmat", "jtable", "mse", "estimate", "smile"];

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected key=value, got `{line}`", no + 1)))?;
        let k = k.trim();
        if k.is_empty() || k.starts_with('-') {
            return Err(CliError::config(format!("line {}: bad key `{k}`", no + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Splices the settings of a `--config` file into the argument list.
///
/// File settings come right after the subcommand, so flags given on the
/// command line override them.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    let bin = it.next().unwrap_or_else(|| "bss".into());
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| CliError::config("--config needs a path"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(std::iter::once(bin).chain(rest).collect());
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| CliError::io(&path, e))?;
    let mut settings = parse_config(&text)?;
    let from_file = settings
        .iter()
        .position(|(k, _)| k == "command")
        .map(|i| settings.remove(i).1);
    let on_line = rest.first().filter(|a| !a.starts_with('-')).cloned();
    let command = match (on_line.as_deref(), from_file.as_deref()) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::config(format!(
                "subcommand `{a}` conflicts with command={b} in {path}"
            )))
        }
        (Some(a), _) => {
            rest.remove(0);
            a.to_string()
        }
        (None, Some(b)) => b.to_string(),
        (None, None) => {
            return Err(CliError::config(format!(
                "no subcommand given and no command= in {path}"
            )))
        }
    };
    if !COMMANDS.contains(&command.as_str()) {
        return Err(CliError::config(format!("unknown command `{command}`")));
    }
    let mut out = vec![bin, command];
    out.extend(settings.into_iter().map(|(k, v)| format!("--{k}={v}")));
    out.extend(rest);
    Ok(out)
}
