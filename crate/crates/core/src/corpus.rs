//! Corpus loading and tokenization.
//!
//! A corpus is a UTF-8 text file with one sentence per line. Blank lines are
//! skipped, and sentence ids are assigned contiguously from 0 in file order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Characters removed from token edges when `strip_punctuation` is set.
/// Apostrophes are orthographic in many of the target languages and are kept.
const EDGE_PUNCTUATION: &[char] = &['.', ',', ';', ':', '!', '?', '"', '(', ')', '[', ']'];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    #[serde(default)]
    pub lowercase: bool,
    #[serde(default)]
    pub strip_punctuation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: u64,
    pub text: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub token_count: usize,
    pub source_path: String,
}

/// Splits `text` on Unicode whitespace, applying the optional normalizations
/// in `config`. Tokens that become empty after stripping are dropped.
pub fn tokenize(text: &str, config: TokenizerConfig) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let token = if config.strip_punctuation {
                raw.trim_matches(EDGE_PUNCTUATION)
            } else {
                raw
            };
            if token.is_empty() {
                None
            } else if config.lowercase {
                Some(token.to_lowercase())
            } else {
                Some(token.to_owned())
            }
        })
        .collect()
}

impl Corpus {
    /// Builds a corpus from in-memory lines, with the same blank-line and id
    /// rules as [`load_corpus`].
    pub fn from_lines<I, S>(lines: I, config: TokenizerConfig, source_path: &str) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut sentences = Vec::new();
        for line in lines {
            let line = line.as_ref();
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            sentences.push(Sentence {
                id: sentences.len() as u64,
                text: line.to_owned(),
                tokens: tokenize(line, config),
            });
        }
        let token_count = sentences.iter().map(|s| s.tokens.len()).sum();
        Corpus {
            sentences,
            token_count,
            source_path: source_path.to_owned(),
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Sentence> {
        self.sentences.get(usize::try_from(id).ok()?)
    }
}

pub fn load_corpus(path: impl AsRef<Path>, config: TokenizerConfig) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Encoding {
        path: path.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    Ok(Corpus::from_lines(
        text.split('\n'),
        config,
        &path.to_string_lossy(),
    ))
}
