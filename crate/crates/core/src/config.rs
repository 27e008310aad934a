//! Flat `key=value` configuration files for `cycle` and `sweep`.
//!
//! ```text
//! # worked point
//! mode=three
//! b=0.6931
//! gamma=0.75
//! gamma_values=0.5,0.75,1.0
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::CycleMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    NotFound(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {key} = {value} is out of range ({expected})")]
    Range {
        line: usize,
        key: String,
        value: f64,
        expected: &'static str,
    },
}

/// Values read from a config file; unset keys stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub mode: Option<CycleMode>,
    pub b: Option<f64>,
    pub gamma: Option<f64>,
    pub r: Option<f64>,
    pub b_values: Option<Vec<f64>>,
    pub gamma_values: Option<Vec<f64>>,
    pub r_values: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => ConfigError::NotFound(path.to_path_buf()),
        _ => ConfigError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    parse_config(&text)
}

#[derive(Clone, Copy)]
enum Range {
    Temperature,
    Fraction,
    Ratio,
}

impl Range {
    fn check(self, line: usize, key: &str, value: f64) -> Result<f64, ConfigError> {
        let (ok, expected) = match self {
            Range::Temperature => (value.is_finite() && value > 0.0, "b > 0"),
            Range::Fraction => ((0.0..=1.0).contains(&value), "0 <= gamma <= 1"),
            Range::Ratio => (value.is_finite() && value >= 1.0, "r >= 1"),
        };
        if ok {
            Ok(value)
        } else {
            Err(ConfigError::Range {
                line,
                key: key.to_string(),
                value,
                expected,
            })
        }
    }
}

fn parse_number(line: usize, key: &str, raw: &str) -> Result<f64, ConfigError> {
    raw.trim().parse::<f64>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("malformed number '{}' for {key}", raw.trim()),
    })
}

fn parse_list(line: usize, key: &str, raw: &str, range: Range) -> Result<Vec<f64>, ConfigError> {
    raw.split(',')
        .map(|item| range.check(line, key, parse_number(line, key, item)?))
        .collect()
}

pub fn parse_config(text: &str) -> Result<ConfigFile, ConfigError> {
    let mut cfg = ConfigFile::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected key=value, got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "mode" => cfg.mode = Some(value.parse().map_err(|message| ConfigError::Parse { line, message })?),
            "b" => cfg.b = Some(Range::Temperature.check(line, key, parse_number(line, key, value)?)?),
            "gamma" => cfg.gamma = Some(Range::Fraction.check(line, key, parse_number(line, key, value)?)?),
            "r" => cfg.r = Some(Range::Ratio.check(line, key, parse_number(line, key, value)?)?),
            "b_values" => cfg.b_values = Some(parse_list(line, key, value, Range::Temperature)?),
            "gamma_values" => cfg.gamma_values = Some(parse_list(line, key, value, Range::Fraction)?),
            "r_values" => cfg.r_values = Some(parse_list(line, key, value, Range::Ratio)?),
            "output" => cfg.output = Some(PathBuf::from(value)),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }
    Ok(cfg)
}
