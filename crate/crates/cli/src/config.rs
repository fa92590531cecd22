//! `--config` files and the `# key=value` headers written on every output.
//!
//! A config file holds `key=value` lines using the long flag names. Lines may
//! carry a leading `#`, so an output file's own header can be fed back in;
//! anything that is not a `key=value` pair with a flag-like key is ignored.

use std::ffi::OsString;
use std::fmt::Write as _;

use clap::CommandFactory;

use crate::Cli;

/// Key/value pairs in the order they are written.
#[derive(Debug, Clone, Default)]
pub struct Header(pub Vec<(String, String)>);

impl Header {
    pub fn new(command: &str) -> Self {
        Self(vec![("command".into(), command.into())])
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    /// Shortest round-trip form, the same one used for CSV cells.
    pub fn num(&mut self, key: &str, x: f64) {
        self.push(key, format!("{x:?}"));
    }

    pub fn flag(&mut self, key: &str, on: bool) {
        self.push(key, on);
    }

    pub fn comment_lines(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

fn is_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

pub fn parse_pairs(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|line| {
            let line = line.trim();
            let line = line.strip_prefix('#').unwrap_or(line).trim();
            let (k, v) = line.split_once('=')?;
            let k = k.trim();
            is_key(k).then(|| (k.to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Path given by `--config PATH` or `--config=PATH`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Splice the config file's pairs in as flags right after the subcommand, so
/// that explicit flags, which come later, win.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let sub_name = args[pos].to_string_lossy().into_owned();
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (k, v) in parse_pairs(&text) {
        if k == "command" {
            if v != sub_name {
                return Err(format!("config was written by `{v}`, not `{sub_name}`"));
            }
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(k.as_str()))
            .ok_or_else(|| format!("unknown config key `{k}`"))?;
        if arg.get_id() == "config" {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(OsString::from(format!("--{k}={v}")));
        } else {
            match v.as_str() {
                "true" => extra.push(OsString::from(format!("--{k}"))),
                "false" => {}
                _ => return Err(format!("config key `{k}` expects true or false, got `{v}`")),
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
