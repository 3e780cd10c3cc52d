//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! # comment
//! [study]
//! design = her
//! replicates = 500
//! [grid]
//! n = 100, 316
//! ```
//!
//! Lists are comma separated. Unknown keys are rejected, all of them listed
//! in one error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Config {
    /// `section.key` -> (value, line).
    entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') || body.starts_with(';') {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Usage(format!("line {line}: unterminated section header")))?
                    .trim();
                if name.is_empty() || name.contains(['[', ']', '.', '=']) {
                    return Err(CliError::Usage(format!("line {line}: bad section name `{name}`")));
                }
                section = name.to_owned();
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {line}: expected `key = value`, found `{body}`")))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Usage(format!("line {line}: bad key `{key}`")));
            }
            let full = if section.is_empty() { key.to_owned() } else { format!("{section}.{key}") };
            if entries.insert(full.clone(), (value.trim().to_owned(), line)).is_some() {
                return Err(CliError::Usage(format!("line {line}: duplicate key `{full}`")));
            }
        }
        Ok(Self { entries })
    }

    /// Rejects every key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        let bad: Vec<String> = self
            .entries
            .iter()
            .filter(|(k, _)| !allowed.contains(&k.as_str()))
            .map(|(k, (_, line))| format!("`{k}` (line {line})"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "invalid config keys: {}; allowed keys: {}",
                bad.join(", "),
                allowed.join(", ")
            )))
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("line {line}: `{key}`: cannot parse `{v}`"))),
        }
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("line {line}: `{key}`: cannot parse `{}`", t.trim())))
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }
}

/// Fully resolved settings, echoed next to every output.
#[derive(Debug, Default)]
pub struct Resolved {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Resolved {
    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        match self.sections.iter_mut().find(|(s, _)| s == section) {
            Some((_, kv)) => kv.push((key.to_owned(), value)),
            None => self.sections.push((section.to_owned(), vec![(key.to_owned(), value)])),
        }
        self
    }

    pub fn set_list<T: ToString>(&mut self, section: &str, key: &str, values: &[T]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(T::to_string).collect();
        self.set(section, key, joined.join(", "))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, (section, kv)) in self.sections.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{section}]");
            for (key, value) in kv {
                let _ = writeln!(out, "{key} = {value}");
            }
        }
        out
    }
}
