//! Run configuration: a TOML file, overridden key by key by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const ECHO_FILE: &str = "resolved_config.toml";

/// Bad flags, bad config files and invalid parameter values; exits with 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Flag values that were actually given, keyed like the config file.
#[derive(Default)]
pub struct Overrides(toml::Table);

impl Overrides {
    /// Every `Some` field of a flag struct.
    pub fn from_flags<S: Serialize>(flags: &S) -> Result<Self> {
        let table = toml::Table::try_from(flags).context("encoding flag overrides")?;
        Ok(Self(table))
    }

    pub fn set(&mut self, key: &str, value: Option<impl Into<toml::Value>>) {
        if let Some(v) = value {
            self.0.insert(key.to_string(), v.into());
        }
    }

    /// Sets `section.key`, creating the section if needed.
    pub fn set_in(&mut self, section: &str, key: &str, value: Option<impl Into<toml::Value>>) {
        if let Some(v) = value {
            let entry = self.0.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            if let toml::Value::Table(t) = entry {
                t.insert(key.to_string(), v.into());
            }
        }
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Reads `file` (if any), applies `overrides` and deserializes the result.
pub fn resolve<C: DeserializeOwned>(file: Option<&Path>, overrides: Overrides) -> Result<C> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
            text.parse::<toml::Table>().map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => toml::Table::new(),
    };
    merge(&mut table, overrides.0);
    C::deserialize(table).map_err(|e| config_err(format!("invalid configuration: {e}")))
}

/// Creates `out_dir` and writes the resolved configuration into it.
pub fn echo<C: Serialize>(out_dir: &Path, command: &str, config: &C) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let body = toml::to_string_pretty(config).context("encoding resolved config")?;
    let text = format!("# snfcs {command}\n{body}");
    let path = out_dir.join(ECHO_FILE);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Parses a library enum from a config string, as a config error.
pub fn parse_field<T>(name: &str, value: &str) -> Result<T>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| config_err(format!("{name}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(serde::Deserialize, Debug, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Demo {
        a: u32,
        #[serde(default)]
        inner: Inner,
    }

    #[derive(serde::Deserialize, Debug, PartialEq, Default)]
    #[serde(deny_unknown_fields)]
    struct Inner {
        x: Option<f64>,
        y: Option<f64>,
    }

    #[test]
    fn flags_override_file_values_and_merge_sections() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "a = 1\n[inner]\nx = 2.0\ny = 3.0\n").unwrap();
        let mut o = Overrides::default();
        o.set("a", Some(5i64));
        o.set_in("inner", "y", Some(4.0));
        let d: Demo = resolve(Some(&p), o).unwrap();
        assert_eq!(d, Demo { a: 5, inner: Inner { x: Some(2.0), y: Some(4.0) } });
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "a = 1\nb = 2\n").unwrap();
        let e = resolve::<Demo>(Some(&p), Overrides::default()).unwrap_err();
        assert!(e.downcast_ref::<ConfigError>().is_some());
    }
}
