//! Corpus ingestion, code-keyed indexing, persistence, and ranked lookup.
//!
//! A corpus is a UTF-8 file of line-delimited JSON records:
//!
//! ```text
//! {"id": "alg-001", "expression": "(x+y)^2", "metadata": {"grade": "9"}}
//! {"id": "alg-002", "expression": "a^2+b"}
//! ```
//!
//! The index maps each entry's code string to the set of entry ids sharing
//! it, so an exact structural match is a single map lookup. Queries rank
//! exact matches first (distance 0) and the rest by normalized edit
//! distance between code strings — a pragmatic heuristic for "near-misses",
//! not part of the coding scheme itself.
//!
//! Persisted indexes are single JSON documents with a `format` version
//! field (`mexcode-index/1`) and the encoder config frozen at build time,
//! so a query can never silently run under a different config.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EncoderConfig;
use crate::encode::{code_distance, encode, parse_code, EncodeError};

/// Version tag carried by every persisted index document.
pub const INDEX_FORMAT: &str = "mexcode-index/1";

/// One corpus record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub expression: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl CorpusEntry {
    pub fn new(id: impl Into<String>, expression: impl Into<String>) -> CorpusEntry {
        CorpusEntry {
            id: id.into(),
            expression: expression.into(),
            metadata: BTreeMap::new(),
        }
    }
}

/// Problems found while validating corpus entries. Builds fail atomically
/// and report every bad entry at once.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntryIssue {
    #[error("duplicate id {id:?}")]
    DuplicateId { id: String },
    #[error("empty id (expression {expression:?})")]
    EmptyId { expression: String },
    #[error("entry {id:?}: {source}")]
    EntryParse { id: String, source: EncodeError },
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("corpus line {line}: {source}")]
    CorpusSyntax {
        line: usize,
        source: serde_json::Error,
    },
    #[error("invalid corpus entries:\n{}", format_issues(issues))]
    InvalidEntries { issues: Vec<EntryIssue> },
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("unsupported index format {found:?} (expected {INDEX_FORMAT:?})")]
    UnsupportedFormat { found: String },
    #[error("corrupt index: {reason}")]
    Corrupt { reason: String },
    #[error("supplied config does not match the config the index was built with")]
    ConfigMismatch,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("index document: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_issues(issues: &[EntryIssue]) -> String {
    let mut out = String::new();
    for issue in issues {
        let _ = writeln!(out, "  - {issue}");
    }
    out.pop();
    out
}

/// A ranked query result.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryHit {
    pub id: String,
    pub distance: f64,
}

/// Immutable code-keyed index over a corpus. Built once with a frozen
/// config; any number of readers may query it concurrently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusIndex {
    format: String,
    config: EncoderConfig,
    entries: BTreeMap<String, CorpusEntry>,
    by_code: BTreeMap<String, BTreeSet<String>>,
}

impl CorpusIndex {
    /// Encodes every entry under `config` and groups ids by code.
    /// Deterministic; fails atomically listing all duplicate ids and
    /// unparseable expressions.
    pub fn build(
        corpus: impl IntoIterator<Item = CorpusEntry>,
        config: EncoderConfig,
    ) -> Result<CorpusIndex, IndexError> {
        let mut issues = Vec::new();
        let mut entries: BTreeMap<String, CorpusEntry> = BTreeMap::new();
        let mut by_code: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

        for entry in corpus {
            if entry.id.is_empty() {
                issues.push(EntryIssue::EmptyId {
                    expression: entry.expression.clone(),
                });
                continue;
            }
            if entries.contains_key(&entry.id) {
                issues.push(EntryIssue::DuplicateId {
                    id: entry.id.clone(),
                });
                continue;
            }
            match encode(&entry.expression, &config) {
                Ok(code) => {
                    by_code
                        .entry(code.code())
                        .or_default()
                        .insert(entry.id.clone());
                    entries.insert(entry.id.clone(), entry);
                }
                Err(source) => issues.push(EntryIssue::EntryParse {
                    id: entry.id.clone(),
                    source,
                }),
            }
        }

        if !issues.is_empty() {
            return Err(IndexError::InvalidEntries { issues });
        }
        Ok(CorpusIndex {
            format: INDEX_FORMAT.to_string(),
            config,
            entries,
            by_code,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn distinct_codes(&self) -> usize {
        self.by_code.len()
    }

    pub fn entry(&self, id: &str) -> Option<&CorpusEntry> {
        self.entries.get(id)
    }

    /// Errors when `supplied` differs from the config frozen at build
    /// time. Queries always run under the frozen config; this guards
    /// callers that believe they are using a different one.
    pub fn ensure_config(&self, supplied: &EncoderConfig) -> Result<(), IndexError> {
        if *supplied == self.config {
            Ok(())
        } else {
            Err(IndexError::ConfigMismatch)
        }
    }

    /// Ranked lookup: exact-code matches first at distance 0 in ascending
    /// id order, then everything else by ascending code distance (ties by
    /// id). Returns at most `k` hits.
    pub fn query(&self, expression: &str, k: usize) -> Result<Vec<QueryHit>, IndexError> {
        let query_code = encode(expression, &self.config)?;
        let query_str = query_code.code();

        let mut hits: Vec<QueryHit> = Vec::new();
        for (code_str, ids) in &self.by_code {
            let distance = if *code_str == query_str {
                0.0
            } else {
                let code = parse_code(code_str).map_err(|e| IndexError::Corrupt {
                    reason: format!("stored code {code_str:?}: {e}"),
                })?;
                code_distance(&query_code, &code)
            };
            hits.extend(ids.iter().map(|id| QueryHit {
                id: id.clone(),
                distance,
            }));
        }
        hits.sort_by(|a, b| {
            a.distance
                .partial_cmp(&b.distance)
                .expect("distances are finite")
                .then_with(|| a.id.cmp(&b.id))
        });
        hits.truncate(k);
        Ok(hits)
    }

    /// Writes the index as a single JSON document.
    pub fn save_to(&self, writer: impl Write) -> Result<(), IndexError> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn save_to_path(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        self.save_to(File::create(path)?)
    }

    /// Reads an index document, checking the format tag and internal
    /// consistency (codes parse; the id sets partition the entries).
    pub fn load_from(reader: impl Read) -> Result<CorpusIndex, IndexError> {
        let index: CorpusIndex = serde_json::from_reader(reader)?;
        if index.format != INDEX_FORMAT {
            return Err(IndexError::UnsupportedFormat {
                found: index.format,
            });
        }
        let mut seen = BTreeSet::new();
        for (code, ids) in &index.by_code {
            parse_code(code).map_err(|e| IndexError::Corrupt {
                reason: format!("stored code {code:?}: {e}"),
            })?;
            for id in ids {
                if !index.entries.contains_key(id) {
                    return Err(IndexError::Corrupt {
                        reason: format!("code {code:?} references unknown id {id:?}"),
                    });
                }
                if !seen.insert(id.clone()) {
                    return Err(IndexError::Corrupt {
                        reason: format!("id {id:?} appears under more than one code"),
                    });
                }
            }
        }
        if seen.len() != index.entries.len() {
            return Err(IndexError::Corrupt {
                reason: "some entries are missing from the code map".to_string(),
            });
        }
        Ok(index)
    }

    pub fn load_from_path(path: impl AsRef<Path>) -> Result<CorpusIndex, IndexError> {
        Self::load_from(File::open(path)?)
    }
}

/// Reads a line-delimited JSON corpus. Blank lines are skipped; syntax
/// errors carry their 1-based line number.
pub fn read_corpus(reader: impl BufRead) -> Result<Vec<CorpusEntry>, IndexError> {
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: CorpusEntry =
            serde_json::from_str(&line).map_err(|source| IndexError::CorpusSyntax {
                line: idx + 1,
                source,
            })?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Reads a corpus file from disk.
pub fn read_corpus_path(path: impl AsRef<Path>) -> Result<Vec<CorpusEntry>, IndexError> {
    read_corpus(BufReader::new(File::open(path)?))
}
