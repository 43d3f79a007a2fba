//! `--config file.json`: a command name plus its flags, expanded to argv.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use cvtomo::{Error, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// `{"schema_version": 1, "command": "design", "args": {"basis": "fock:4", "greedy": false}}`.
/// Keys are flag names without dashes; `true` means a bare switch, lists
/// are comma-joined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "current_version")]
    pub schema_version: u32,
    pub command: String,
    #[serde(default)]
    pub args: BTreeMap<String, Value>,
}

fn current_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::Config(format!("config value for {key:?} must be a string, number, boolean or list"))),
    }
}

impl RunConfig {
    pub fn to_argv(&self) -> Result<Vec<String>> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported config schema version {}", self.schema_version)));
        }
        let mut argv = vec![self.command.clone()];
        for (k, v) in &self.args {
            let flag = format!("--{}", k.replace('_', "-"));
            match v {
                Value::Null | Value::Bool(false) => {}
                Value::Bool(true) => argv.push(flag),
                Value::Array(items) => {
                    let parts: Vec<String> = items.iter().map(|x| scalar(k, x)).collect::<Result<_>>()?;
                    argv.push(flag);
                    argv.push(parts.join(","));
                }
                other => {
                    argv.push(flag);
                    argv.push(scalar(k, other)?);
                }
            }
        }
        Ok(argv)
    }

    /// Inverse of [`to_argv`](Self::to_argv) for `command --flag value … --switch`.
    #[cfg(test)]
    pub fn from_argv(argv: &[String]) -> Result<RunConfig> {
        let (command, rest) = argv.split_first().ok_or_else(|| Error::Config("empty command line".into()))?;
        let mut args = BTreeMap::new();
        let mut i = 0;
        while i < rest.len() {
            let key = rest[i]
                .strip_prefix("--")
                .ok_or_else(|| Error::Config(format!("expected a --flag, got {:?}", rest[i])))?;
            match rest.get(i + 1).filter(|v| !v.starts_with("--")) {
                Some(v) => {
                    args.insert(key.to_string(), Value::String(v.clone()));
                    i += 2;
                }
                None => {
                    args.insert(key.to_string(), Value::Bool(true));
                    i += 1;
                }
            }
        }
        Ok(RunConfig { schema_version: CONFIG_SCHEMA_VERSION, command: command.clone(), args })
    }
}
