//! Flat `key=value` config files and flag/file/default resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// Settings resolved so far, in resolution order, plus the file values not
/// yet claimed by any setting.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, (String, usize)>,
    used: BTreeSet<String>,
    effective: Vec<(String, String)>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Resolver {
    /// Reads `path` if given. Blank lines and `#` comments are skipped;
    /// keys may be written with `-` or `_`.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut r = Resolver::default();
        let Some(path) = path else {
            return Ok(r);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        r.parse(&text, &path.display().to_string())?;
        Ok(r)
    }

    pub fn parse(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("{origin}:{}: expected key=value", i + 1)));
            };
            let key = normalize(k);
            if key.is_empty() {
                return Err(CliError::Usage(format!("{origin}:{}: empty key", i + 1)));
            }
            if self.file.insert(key.clone(), (v.trim().to_string(), i + 1)).is_some() {
                return Err(CliError::Usage(format!("{origin}:{}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(())
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some((raw, line)) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config line {line}: bad value for `{key}`: {e}"))),
        }
    }

    /// Flag, else file, else `default`; recorded in the effective config.
    pub fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = self.hidden(key, flag, default)?;
        self.effective.push((key.to_string(), v.to_string()));
        Ok(v)
    }

    /// Like [`Resolver::value`] but without a default.
    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => {
                self.used.insert(key.to_string());
                Some(v)
            }
            None => self.file_value(key)?,
        };
        if let Some(v) = &v {
            self.effective.push((key.to_string(), v.to_string()));
        }
        Ok(v)
    }

    /// Resolved like [`Resolver::value`] but left out of the echoed config
    /// (settings such as the thread count that do not affect results).
    pub fn hidden<T: FromStr>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => {
                self.used.insert(key.to_string());
                Ok(v)
            }
            None => Ok(self.file_value(key)?.unwrap_or(default)),
        }
    }

    /// Records a derived setting.
    pub fn record(&mut self, key: &str, value: impl Display) {
        self.effective.push((key.to_string(), value.to_string()));
    }

    /// Rejects file keys that no setting consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .file
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }

    pub fn effective_text(&self) -> String {
        let mut out = String::from("# effective configuration\n");
        for (k, v) in &self.effective {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}
