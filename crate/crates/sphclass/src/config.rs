//! Effective settings for one command: flag, then config file, then
//! (for the seed only) `SPHCLASS_SEED`, then the built-in default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const SEED_ENV: &str = "SPHCLASS_SEED";

/// Parses `key = value` lines. `#` starts a comment; keys may use `-` or `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = normalize_key(k.trim());
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(map)
}

fn normalize_key(k: &str) -> String {
    k.replace('-', "_")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Env,
    Default,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::Flag => "flag",
            Source::File => "config",
            Source::Env => "env",
            Source::Default => "default",
        }
    }
}

/// Resolves settings and remembers every value it handed out.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    file: BTreeMap<String, String>,
    env_seed: Option<String>,
    effective: Vec<(String, String, Source)>,
    /// Keys echoed but left out of result metadata because they cannot change results.
    runtime_only: Vec<String>,
}

impl RunConfig {
    pub fn new(file: BTreeMap<String, String>, env_seed: Option<String>) -> Self {
        RunConfig { file, env_seed, effective: Vec::new(), runtime_only: Vec::new() }
    }

    /// Reads the optional config file and the seed environment variable.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => parse_config_text(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
            None => BTreeMap::new(),
        };
        Ok(Self::new(file, std::env::var(SEED_ENV).ok()))
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let key = normalize_key(key);
        let (value, source) = match flag {
            Some(v) => (v, Source::Flag),
            None => match self.file.get(&key) {
                Some(text) => (parse_value(&key, text, "config file")?, Source::File),
                None => (default, Source::Default),
            },
        };
        self.record(&key, &value, source);
        Ok(value)
    }

    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let key = normalize_key(key);
        let found = match flag {
            Some(v) => Some((v, Source::Flag)),
            None => match self.file.get(&key) {
                Some(text) => Some((parse_value(&key, text, "config file")?, Source::File)),
                None => None,
            },
        };
        Ok(found.map(|(v, s)| {
            self.record(&key, &v, s);
            v
        }))
    }

    /// Like [`RunConfig::get_opt`] for settings such as thread counts that
    /// do not affect any output.
    pub fn get_runtime<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.runtime_only.push(normalize_key(key));
        self.get_opt(key, flag)
    }

    pub fn seed(&mut self, flag: Option<u64>, default: u64) -> Result<u64> {
        let (value, source) = match (flag, self.file.get("seed"), &self.env_seed) {
            (Some(v), _, _) => (v, Source::Flag),
            (None, Some(text), _) => (parse_value("seed", text, "config file")?, Source::File),
            (None, None, Some(text)) => (parse_value("seed", text, SEED_ENV)?, Source::Env),
            (None, None, None) => (default, Source::Default),
        };
        self.record("seed", &value, source);
        Ok(value)
    }

    fn record(&mut self, key: &str, value: &dyn Display, source: Source) {
        self.effective.retain(|(k, _, _)| k != key);
        self.effective.push((key.to_string(), value.to_string(), source));
    }

    pub fn effective(&self) -> impl Iterator<Item = (&str, &str)> {
        self.effective.iter().map(|(k, v, _)| (k.as_str(), v.as_str()))
    }

    /// Config-file keys the command never asked for.
    pub fn unused_file_keys(&self) -> Vec<&str> {
        self.file.keys().filter(|k| !self.effective.iter().any(|(e, _, _)| e == *k)).map(String::as_str).collect()
    }

    /// One `key=value (source)` line per resolved setting.
    pub fn echo(&self) -> String {
        self.effective.iter().map(|(k, v, s)| format!("config: {k}={v} ({})\n", s.name())).collect()
    }

    /// `key=value` pairs for result metadata.
    pub fn metadata(&self) -> Vec<(String, String)> {
        self.effective
            .iter()
            .filter(|(k, _, _)| !self.runtime_only.contains(k))
            .map(|(k, v, _)| (format!("cli.{k}"), v.clone()))
            .collect()
    }
}

fn parse_value<T>(key: &str, text: &str, origin: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    text.parse().map_err(|e| Error::Config(format!("{origin}: {key} = {text:?}: {e}")))
}

/// `on`/`off` switch used by several flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    pub fn is_on(self) -> bool {
        self == Toggle::On
    }
}

impl FromStr for Toggle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "on" | "true" | "yes" | "1" => Ok(Toggle::On),
            "off" | "false" | "no" | "0" => Ok(Toggle::Off),
            _ => Err(format!("expected on or off, got {s:?}")),
        }
    }
}

impl Display for Toggle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.is_on() { "on" } else { "off" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str, env: Option<&str>) -> RunConfig {
        RunConfig::new(parse_config_text(text).unwrap(), env.map(String::from))
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut c = cfg("epochs = 5\nlr-start = 0.01 # faster\n", None);
        assert_eq!(c.get("epochs", Some(7usize), 48).unwrap(), 7);
        assert_eq!(c.get("epochs", None::<usize>, 48).unwrap(), 5);
        assert_eq!(c.get("lr_start", None::<f64>, 1e-3).unwrap(), 0.01);
        assert_eq!(c.get("batch", None::<usize>, 16).unwrap(), 16);
        assert!(c.echo().contains("config: epochs=5 (config)"));
        assert!(c.echo().contains("config: batch=16 (default)"));
    }

    #[test]
    fn seed_falls_back_to_env() {
        assert_eq!(cfg("", Some("9")).seed(None, 0).unwrap(), 9);
        assert_eq!(cfg("seed=4", Some("9")).seed(None, 0).unwrap(), 4);
        assert_eq!(cfg("seed=4", Some("9")).seed(Some(1), 0).unwrap(), 1);
        assert_eq!(cfg("", None).seed(None, 3).unwrap(), 3);
        assert!(matches!(cfg("", Some("x")).seed(None, 0), Err(Error::Config(_))));
    }

    #[test]
    fn bad_lines_are_errors() {
        assert!(parse_config_text("epochs 5").is_err());
        assert!(parse_config_text("a=1\na=2").is_err());
        let mut c = cfg("epochs = many", None);
        assert!(matches!(c.get("epochs", None::<usize>, 1), Err(Error::Config(_))));
    }

    #[test]
    fn unused_keys_are_reported() {
        let mut c = cfg("epochs=2\nfilterz=3", None);
        c.get("epochs", None::<usize>, 1).unwrap();
        assert_eq!(c.unused_file_keys(), vec!["filterz"]);
    }

    #[test]
    fn runtime_settings_stay_out_of_metadata() {
        let mut c = cfg("threads = 3", None);
        assert_eq!(c.get_runtime("threads", None::<usize>).unwrap(), Some(3));
        c.get("epochs", Some(2usize), 1).unwrap();
        assert!(c.echo().contains("threads=3"));
        assert_eq!(c.metadata(), vec![("cli.epochs".to_string(), "2".to_string())]);
    }
}
