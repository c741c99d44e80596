//! `key = value` configuration with `[section]` groups.
//!
//! Sections are named after CLI subcommands and keys after their long flags
//! (`mc-reps = 999` under `[test]`). `[general]` holds options shared by all
//! subcommands. Values given on the command line win.

use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    ini: Option<Ini>,
}

impl Config {
    pub fn empty() -> Self {
        Config::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        Ok(Config { ini: Some(ini) })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        let ini = self.ini.as_ref()?;
        ini.section(Some(section))
            .and_then(|s| s.get(key))
            .or_else(|| ini.section(Some("general")).and_then(|s| s.get(key)))
    }

    /// Typed lookup in `section`, falling back to `[general]`.
    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => {
                v.trim().parse().map(Some).map_err(|e| AppError::Config(format!("[{section}] {key} = {v}: {e}")))
            }
        }
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|e| AppError::Config(format!("[{section}] {key}: {e}"))),
        }
    }

    /// CLI value if given, else the config value, else `default`.
    pub fn pick<T: FromStr>(&self, cli: Option<T>, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match cli {
            Some(v) => v,
            None => self.get(section, key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T: FromStr>(&self, cli: Option<T>, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match cli {
            Some(v) => Some(v),
            None => self.get(section, key)?,
        })
    }

    pub fn pick_list<T: FromStr>(
        &self,
        cli: Option<Vec<T>>,
        section: &str,
        key: &str,
        default: Vec<T>,
    ) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match cli {
            Some(v) => v,
            None => self.get_list(section, key)?.unwrap_or(default),
        })
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}
