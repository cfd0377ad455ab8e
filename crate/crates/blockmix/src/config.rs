//! `key = value` configuration files and flag resolution.
//!
//! Each setting is taken from the command line if given there, else from the
//! config file, else from its default. Blank lines and lines starting with
//! `#` are skipped. Keys are long flag names without the dashes, e.g.
//! `max-sweeps = 200`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub fn parse_config(text: &str, name: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Usage(format!("{name}:{}: expected key = value", idx + 1)));
        };
        let key = key.trim().trim_start_matches("--").to_string();
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Usage(format!("{name}:{}: {key} set twice", idx + 1)));
        }
    }
    Ok(out)
}

/// Resolves settings and remembers every resolved value for the manifest.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: Vec<String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self { file, ..Self::default() }
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let bytes = crate::io::read(p)?;
                let text = String::from_utf8(bytes).map_err(|_| Error::Usage(format!("{} is not UTF-8", p.display())))?;
                Ok(Self::new(parse_config(&text, &p.display().to_string())?))
            }
        }
    }

    fn from_file<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Usage(format!("config value {raw:?} is not valid for {key}"))),
        }
    }

    /// A setting that may be absent everywhere.
    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        self.used.push(key.into());
        let value = match flag {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        if let Some(v) = &value {
            self.resolved.insert(key.into(), v.to_string());
        }
        Ok(value)
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        Ok(self.optional(key, flag)?.unwrap_or_else(|| {
            self.resolved.insert(key.into(), default.to_string());
            default
        }))
    }

    pub fn required<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T> {
        self.optional(key, flag)?
            .ok_or_else(|| Error::Usage(format!("--{key} is required")))
    }

    /// Fails on config keys that no setting asked for.
    pub fn finish(self) -> Result<BTreeMap<String, String>> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains(k)) {
            return Err(Error::Usage(format!("unknown config key {k:?}")));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = parse_config("# comment\nrestarts = 7\n\nseed=3\n", "cfg").unwrap();
        let mut r = Resolver::new(file);
        assert_eq!(r.get("restarts", Some(2usize), 1).unwrap(), 2);
        assert_eq!(r.get("seed", None::<u64>, 0).unwrap(), 3);
        assert_eq!(r.get("max-sweeps", None::<usize>, 100).unwrap(), 100);
        let resolved = r.finish().unwrap();
        assert_eq!(resolved["restarts"], "2");
        assert_eq!(resolved["seed"], "3");
        assert_eq!(resolved["max-sweeps"], "100");
    }

    #[test]
    fn bad_files_are_usage_errors() {
        assert!(parse_config("restarts\n", "cfg").is_err());
        assert!(parse_config("a=1\na=2\n", "cfg").is_err());
        let mut r = Resolver::new(parse_config("k = two\n", "cfg").unwrap());
        assert!(matches!(r.required::<usize>("k", None), Err(Error::Usage(_))));
        let r = Resolver::new(parse_config("colour = red\n", "cfg").unwrap());
        assert!(r.finish().is_err());
        let mut r = Resolver::default();
        assert!(r.required::<usize>("k", None).is_err());
    }
}
