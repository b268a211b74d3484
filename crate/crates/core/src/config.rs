//! Flat `key = value` configuration files with optional `[section]` headers.
//!
//! Keys before the first header are shared by every command; keys in a
//! section named after a command override them for that command. `#` starts
//! a comment.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

pub type Settings = BTreeMap<String, String>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub common: Settings,
    pub sections: BTreeMap<String, Settings>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?
                    .trim();
                if name.is_empty() {
                    return Err(err("empty section name".into()));
                }
                cfg.sections.entry(name.to_owned()).or_default();
                current = Some(name.to_owned());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            let target = match &current {
                Some(s) => cfg.sections.get_mut(s).expect("section exists"),
                None => &mut cfg.common,
            };
            // repeated keys accumulate as a `;`-separated list
            target
                .entry(key.to_owned())
                .and_modify(|v| {
                    v.push(';');
                    v.push_str(value.trim());
                })
                .or_insert_with(|| value.trim().to_owned());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text, path)
    }

    /// Shared keys overridden by the keys of `command`'s section.
    pub fn for_command(&self, command: &str) -> Settings {
        let mut out = self.common.clone();
        if let Some(section) = self.sections.get(command) {
            out.extend(section.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        out
    }
}

/// Parses an angle such as `2pi`, `3pi/2`, `3*pi/2`, `pi/2`, `75%` (of the
/// full circle) or a plain number of radians.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || Error::Config(format!("cannot parse angle '{s}'"));
    let value = if let Some(p) = t.strip_suffix('%') {
        p.parse::<f64>().map_err(|_| bad())? / 100.0 * 2.0 * PI
    } else if let Some((pre, post)) = t.split_once("pi") {
        let pre = pre.strip_suffix('*').unwrap_or(pre);
        let coeff = if pre.is_empty() {
            1.0
        } else {
            pre.parse::<f64>().map_err(|_| bad())?
        };
        let div = match post.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None if post.is_empty() => 1.0,
            None => return Err(bad()),
        };
        coeff * PI / div
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Parses a comma-separated list with `parse`.
pub fn parse_list<T>(s: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse)
        .collect()
}

pub fn parse_value<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{s}' for '{key}'")))
}

pub fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean '{s}' for '{key}'"))),
    }
}
