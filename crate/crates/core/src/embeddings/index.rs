use serde::{Deserialize, Serialize};

use super::model::{EmbeddingModel, SentenceEncoder};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: u64,
    pub text: String,
    pub vector: Vec<f32>,
}

/// Precomputed sentence vectors stored alongside the sentence text.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceIndex {
    dim: usize,
    entries: Vec<IndexEntry>,
}

impl SentenceIndex {
    /// Validates ordering, uniqueness, dimensionality and finiteness.
    pub fn new(dim: usize, entries: Vec<IndexEntry>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("index dimension must be positive".into()));
        }
        for (pos, entry) in entries.iter().enumerate() {
            if entry.vector.len() != dim {
                return Err(Error::Validation(format!(
                    "entry {} has {} components, expected {dim}",
                    entry.id,
                    entry.vector.len()
                )));
            }
            if entry.vector.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "entry {} has non-finite components",
                    entry.id
                )));
            }
            if pos > 0 && entries[pos - 1].id >= entry.id {
                return Err(Error::Validation(format!(
                    "entry ids must be strictly increasing ({} after {})",
                    entry.id,
                    entries[pos - 1].id
                )));
            }
        }
        Ok(SentenceIndex { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Looks up an entry by sentence id.
    pub fn get(&self, id: u64) -> Option<&IndexEntry> {
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|pos| &self.entries[pos])
    }

    /// Returns a copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| IndexEntry {
                id: e.id,
                text: e.text.clone(),
                vector: e.vector.iter().map(|x| x * factor).collect(),
            })
            .collect();
        SentenceIndex {
            dim: self.dim,
            entries,
        }
    }
}

/// One entry per corpus sentence, in id order, holding its sentence vector.
pub fn build_index(model: &EmbeddingModel, corpus: &Corpus) -> SentenceIndex {
    let entries = corpus
        .sentences
        .iter()
        .map(|s| IndexEntry {
            id: s.id,
            text: s.text.clone(),
            vector: model.encode(&s.tokens),
        })
        .collect();
    SentenceIndex {
        dim: model.dim(),
        entries,
    }
}
