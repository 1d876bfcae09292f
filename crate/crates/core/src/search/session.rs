use std::collections::BTreeSet;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Embedding,
    Fuzzy,
    /// `alpha` weights the (rescaled) cosine; `1 - alpha` weights the fuzzy score.
    Hybrid { alpha: f64 },
}

impl SearchMode {
    pub fn hybrid(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Validation(format!("alpha must be in [0, 1], got {alpha}")));
        }
        Ok(SearchMode::Hybrid { alpha })
    }

    /// Parses `embedding`, `fuzzy` or `hybrid`; `alpha` only applies to hybrid.
    pub fn parse(name: &str, alpha: Option<f64>) -> Result<Self> {
        match name {
            "embedding" => Ok(SearchMode::Embedding),
            "fuzzy" => Ok(SearchMode::Fuzzy),
            "hybrid" => SearchMode::hybrid(alpha.unwrap_or(DEFAULT_ALPHA)),
            other => Err(Error::Validation(format!(
                "unknown search mode {other:?} (expected embedding, fuzzy or hybrid)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SearchMode::Embedding => "embedding",
            SearchMode::Fuzzy => "fuzzy",
            SearchMode::Hybrid { .. } => "hybrid",
        }
    }

    pub fn uses_vectors(&self) -> bool {
        !matches!(self, SearchMode::Fuzzy)
    }
}

/// One user's search state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub query_text: String,
    pub query_tokens: Vec<String>,
    /// Present in embedding and hybrid modes.
    pub query_vector: Option<Vec<f64>>,
    pub k: usize,
    pub mode: SearchMode,
    /// In order of first relevant marking.
    pub relevant: Vec<u64>,
    pub irrelevant: BTreeSet<u64>,
    pub shown: BTreeSet<u64>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    /// Number of batches returned so far.
    pub rounds: u32,
}

impl Session {
    pub(crate) fn new(
        query_text: &str,
        query_tokens: Vec<String>,
        query_vector: Option<Vec<f64>>,
        mode: SearchMode,
        k: usize,
    ) -> Self {
        Session {
            session_id: uuid::Uuid::new_v4().simple().to_string(),
            query_text: query_text.to_owned(),
            query_tokens,
            query_vector,
            k,
            mode,
            relevant: Vec::new(),
            irrelevant: BTreeSet::new(),
            shown: BTreeSet::new(),
            created_at: unix_now(),
            rounds: 0,
        }
    }

    /// Marks a shown sentence as relevant or not; a later mark overrides an
    /// earlier one.
    pub fn record_feedback(&mut self, sentence_id: u64, relevant: bool) -> Result<()> {
        if !self.shown.contains(&sentence_id) {
            return Err(Error::Validation(format!(
                "sentence {sentence_id} has not been shown in this session"
            )));
        }
        if relevant {
            self.irrelevant.remove(&sentence_id);
            if !self.relevant.contains(&sentence_id) {
                self.relevant.push(sentence_id);
            }
        } else {
            self.relevant.retain(|&id| id != sentence_id);
            self.irrelevant.insert(sentence_id);
        }
        Ok(())
    }

    pub fn is_relevant(&self, sentence_id: u64) -> bool {
        self.relevant.contains(&sentence_id)
    }

    /// Checks the set invariants (used after restoring persisted sessions).
    pub fn check_invariants(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Validation("k must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        for id in &self.relevant {
            if !seen.insert(*id) {
                return Err(Error::Validation(format!("sentence {id} marked relevant twice")));
            }
            if self.irrelevant.contains(id) {
                return Err(Error::Validation(format!(
                    "sentence {id} is both relevant and irrelevant"
                )));
            }
        }
        if let Some(id) = seen.iter().chain(&self.irrelevant).find(|id| !self.shown.contains(id)) {
            return Err(Error::Validation(format!("judged sentence {id} was never shown")));
        }
        Ok(())
    }
}

pub(crate) fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
