//! Plain-text `key = value` run configuration. Each subcommand declares the
//! keys it understands with their defaults; a config file may set any of
//! them and command-line flags override the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::fail::Failure;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    section: &'static str,
    /// Declared keys in display order with their default values.
    keys: Vec<(&'static str, Option<String>)>,
    values: BTreeMap<&'static str, String>,
}

impl RunConfig {
    pub fn new(section: &'static str, keys: &[(&'static str, Option<&str>)]) -> Self {
        let keys: Vec<_> = keys.iter().map(|&(k, d)| (k, d.map(str::to_owned))).collect();
        let values = keys
            .iter()
            .filter_map(|(k, d)| d.clone().map(|d| (*k, d)))
            .collect();
        Self { section, keys, values }
    }

    fn declared(&self, key: &str) -> Option<&'static str> {
        self.keys.iter().map(|(k, _)| *k).find(|k| *k == key)
    }

    /// Applies a config file. Unknown keys and malformed lines are usage
    /// errors.
    pub fn load_file(&mut self, path: &Path) -> Result<(), Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        self.parse(&text, &path.display().to_string())
    }

    pub fn parse(&mut self, text: &str, origin: &str) -> Result<(), Failure> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Failure::Usage(format!("{origin}:{}: expected `key = value`", lineno + 1)));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| Failure::Usage(format!("{origin}:{}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), String> {
        let key = self
            .declared(key)
            .ok_or_else(|| format!("unknown key {key:?} for `{}`", self.section))?;
        self.values.insert(key, value.into());
        Ok(())
    }

    /// Sets `key` when the flag was given.
    pub fn flag<T: Display>(&mut self, key: &'static str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v.to_string()).expect("flag keys are declared");
        }
    }

    pub fn raw(&self, key: &str) -> Result<&str, Failure> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Failure::Usage(format!("missing required setting `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, Failure>
    where
        T::Err: Display,
    {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|e| Failure::Usage(format!("bad value {raw:?} for `{key}`: {e}")))
    }

    pub fn path(&self, key: &str) -> Result<PathBuf, Failure> {
        Ok(PathBuf::from(self.raw(key)?))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, Failure>
    where
        T::Err: Display,
    {
        let raw = self.raw(key)?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| Failure::Usage(format!("bad item {s:?} in `{key}`: {e}")))
            })
            .collect()
    }

    /// Every set key, in declaration order.
    pub fn render(&self) -> String {
        let mut out = format!("# advwalk {}\n", self.section);
        for (k, _) in &self.keys {
            if let Some(v) = self.values.get(k) {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        fs::write(path, self.render()).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
    }
}
