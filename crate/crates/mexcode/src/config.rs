//! Encoder configuration, including the on-disk config file format.
//!
//! The file format is a flat key-value document:
//!
//! ```text
//! # comment lines start with '#'
//! mode = nary                  # nary | binary
//! tie_break = alphabetical     # alphabetical | reject
//! preserve_symbols = pi, e
//! preserve_numbers = 3.14, 9.8
//! preserve_exponents = 2, 3
//! ```
//!
//! Every key is optional and defaults to the values above (with empty
//! preservation lists). List values are comma-separated and whitespace
//! around items is trimmed. Comments are full-line only.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whether commutative nodes keep their N-ary form or are rewritten into
/// nested binary nodes before encoding. Codes produced under the two modes
/// are distinct and must never be compared with each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeMode {
    #[default]
    Nary,
    Binary,
}

/// Policy for children that the structural ordering cannot distinguish.
///
/// `Alphabetical` falls back to the carried symbol/numeral text and counts
/// the event; `Reject` refuses to encode such expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    Alphabetical,
    Reject,
}

/// Settings that shape the emitted code.
///
/// The preservation lists exempt exact source texts from the default
/// `Sym`/`Num` erasure: preserved vertices are emitted as `Sym:<name>` or
/// `Num:<numeral>`. `preserve_exponents` applies only to numerals sitting
/// directly in the exponent position of a power.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub mode: TreeMode,
    pub tie_break: TieBreak,
    pub preserve_symbols: BTreeSet<String>,
    pub preserve_numbers: BTreeSet<String>,
    pub preserve_exponents: BTreeSet<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`")]
    MissingEquals { line: usize },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("config line {line}: invalid value {value:?} for {key} (expected {expected})")]
    InvalidValue {
        line: usize,
        key: &'static str,
        value: String,
        expected: &'static str,
    },
}

impl EncoderConfig {
    /// Parses the flat key-value config document described in the module
    /// docs. Unknown or repeated keys are errors; missing keys default.
    pub fn parse_str(text: &str) -> Result<EncoderConfig, ConfigError> {
        let mut config = EncoderConfig::default();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::MissingEquals { line });
            };
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            match key {
                "mode" => {
                    config.mode = match value {
                        "nary" => TreeMode::Nary,
                        "binary" => TreeMode::Binary,
                        _ => {
                            return Err(ConfigError::InvalidValue {
                                line,
                                key: "mode",
                                value: value.to_string(),
                                expected: "nary | binary",
                            })
                        }
                    };
                }
                "tie_break" => {
                    config.tie_break = match value {
                        "alphabetical" => TieBreak::Alphabetical,
                        "reject" => TieBreak::Reject,
                        _ => {
                            return Err(ConfigError::InvalidValue {
                                line,
                                key: "tie_break",
                                value: value.to_string(),
                                expected: "alphabetical | reject",
                            })
                        }
                    };
                }
                "preserve_symbols" => config.preserve_symbols = parse_list(value),
                "preserve_numbers" => config.preserve_numbers = parse_list(value),
                "preserve_exponents" => config.preserve_exponents = parse_list(value),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(config)
    }

    /// Renders the config in the same format [`EncoderConfig::parse_str`]
    /// accepts. Round-trips exactly.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("mode = {}\n", self.mode));
        out.push_str(&format!("tie_break = {}\n", self.tie_break));
        out.push_str(&format!(
            "preserve_symbols = {}\n",
            join_list(&self.preserve_symbols)
        ));
        out.push_str(&format!(
            "preserve_numbers = {}\n",
            join_list(&self.preserve_numbers)
        ));
        out.push_str(&format!(
            "preserve_exponents = {}\n",
            join_list(&self.preserve_exponents)
        ));
        out
    }
}

impl fmt::Display for TreeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeMode::Nary => "nary",
            TreeMode::Binary => "binary",
        })
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::Alphabetical => "alphabetical",
            TieBreak::Reject => "reject",
        })
    }
}

fn parse_list(value: &str) -> BTreeSet<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|item| !item.is_empty())
        .map(str::to_string)
        .collect()
}

fn join_list(items: &BTreeSet<String>) -> String {
    items.iter().cloned().collect::<Vec<_>>().join(", ")
}
