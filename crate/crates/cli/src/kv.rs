//! Flat `key = value` run-configuration files and the precedence rules
//! that merge them with command-line flags.
//!
//! File format: one `key = value` pair per line. A `#` starts a comment
//! anywhere on a line; blank lines are ignored. Keys carry the same names
//! as the long command-line flags, with `-` and `_` interchangeable.
//! A value given on the command line always wins over the file value.
//! Keys the active subcommand does not consult are rejected, so typos
//! never silently do nothing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::errors::CliError;

/// Parsed contents of one config file: normalized key -> raw value text.
#[derive(Debug)]
pub struct FileValues {
    entries: BTreeMap<String, String>,
}

fn normalize_key(k: &str) -> String {
    k.replace('-', "_")
}

/// Read and parse a `key = value` file.
pub fn load(path: &Path) -> Result<FileValues, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read config file `{}`: {e}", path.display()))
    })?;
    let shown = path.display().to_string();
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Malformed {
                path: shown,
                line: lineno,
                what: "expected `key = value`".into(),
            });
        };
        let key = normalize_key(k.trim());
        let ident_ok = !key.is_empty()
            && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ident_ok {
            return Err(CliError::Malformed {
                path: shown,
                line: lineno,
                what: format!("invalid key name `{}`", k.trim()),
            });
        }
        let val = v.trim().to_string();
        if val.is_empty() {
            return Err(CliError::Malformed {
                path: shown,
                line: lineno,
                what: format!("key `{key}` has an empty value"),
            });
        }
        if entries.insert(key.clone(), val).is_some() {
            return Err(CliError::Malformed {
                path: shown,
                line: lineno,
                what: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(FileValues { entries })
}

/// Merges flag values with config-file values, flags first. Records which
/// file keys were consulted so the leftovers can be rejected.
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Resolver {
    pub fn new(file: Option<FileValues>) -> Self {
        Resolver {
            file: file.map(|f| f.entries).unwrap_or_default(),
            used: BTreeSet::new(),
        }
    }

    /// The flag value if present, else the parsed file value, else `None`.
    pub fn get<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        let k = normalize_key(key);
        self.used.insert(k.clone());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(&k) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| CliError::TypeError {
                key: key.to_string(),
                detail: format!("cannot parse `{raw}`: {e}"),
            }),
        }
    }

    /// Like [`Resolver::get`] but the key must resolve to a value.
    pub fn req<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| CliError::MissingKey(key.to_string()))
    }

    /// Like [`Resolver::get`] but falls back to `default`.
    pub fn get_or<T: FromStr>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    /// Reject the first file key no `get` consulted.
    pub fn finish(self) -> Result<(), CliError> {
        for k in self.file.keys() {
            if !self.used.contains(k) {
                return Err(CliError::UnknownKey(k.clone()));
            }
        }
        Ok(())
    }
}

/// Validate an enumerated string value against its allowed spellings
/// (`-` and `_` interchangeable) and return the canonical form.
pub fn choice(key: &str, val: &str, allowed: &[&'static str]) -> Result<&'static str, CliError> {
    let norm = val.replace('_', "-");
    for &a in allowed {
        if norm == a {
            return Ok(a);
        }
    }
    Err(CliError::TypeError {
        key: key.to_string(),
        detail: format!("`{val}` is not one of {}", allowed.join("|")),
    })
}

/// Reject a key that was supplied but does not apply in the active context.
pub fn forbid<T>(key: &str, v: &Option<T>, ctx: &str) -> Result<(), CliError> {
    if v.is_some() {
        return Err(CliError::Usage(format!("key `{key}` does not apply {ctx}")));
    }
    Ok(())
}
