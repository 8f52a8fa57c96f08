//! Line-based `key = value` configuration with `[section]` headers.
//!
//! `#` starts a comment anywhere on a line. Keys are case-sensitive; lists are
//! comma-separated. Every lookup error names the offending line.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<(String, String), Entry>,
    sections: BTreeMap<String, usize>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Config::parse(text)
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut section: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("unterminated section header `{body}`")))?
                    .trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(err(line, format!("bad section name `{name}`")));
                }
                if cfg.sections.insert(name.to_string(), line).is_some() {
                    return Err(err(line, format!("section [{name}] appears twice")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{body}`")))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(err(line, format!("bad key `{key}`")));
            }
            let sec = section
                .clone()
                .ok_or_else(|| err(line, format!("key `{key}` appears before any [section]")))?;
            let entry = Entry { value: value.trim().to_string(), line };
            if let Some(prev) = cfg.entries.insert((sec.clone(), key.to_string()), entry) {
                return Err(err(line, format!("key `{sec}.{key}` already set on line {}", prev.line)));
            }
        }
        Ok(cfg)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    /// Line of a key, or 0 when absent.
    pub fn line_of(&self, section: &str, key: &str) -> usize {
        self.entry(section, key).map_or(0, |e| e.line)
    }

    /// Parsed value or `default` when the key is absent.
    pub fn value<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .map_err(|_| err(e.line, format!("cannot parse `{section}.{key} = {}`", e.value))),
        }
    }

    pub fn list<T: FromStr>(&self, section: &str, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) if e.value.is_empty() => Ok(Vec::new()),
            Some(e) => e
                .value
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| err(e.line, format!("cannot parse list item `{}` of `{section}.{key}`", s.trim())))
                })
                .collect(),
        }
    }

    /// Rejects any key or section outside `allowed` (pairs of section and key
    /// names), so typos do not silently fall back to defaults.
    pub fn check_known(&self, allowed: &[(&str, &[&str])]) -> Result<()> {
        for (name, &line) in &self.sections {
            if !allowed.iter().any(|(s, _)| s == name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
        }
        for ((sec, key), e) in &self.entries {
            let ok = allowed.iter().any(|(s, keys)| s == sec && keys.contains(&key.as_str()));
            if !ok {
                return Err(err(e.line, format!("unknown key `{sec}.{key}`")));
            }
        }
        Ok(())
    }

    /// Error tied to the line of `section.key`.
    pub fn error_at(&self, section: &str, key: &str, msg: impl Into<String>) -> Error {
        err(self.line_of(section, key), format!("{section}.{key}: {}", msg.into()))
    }
}
