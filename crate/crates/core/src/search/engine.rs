use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::export::{self, ExportFormat};
use super::session::{SearchMode, Session};
use crate::corpus::{tokenize, TokenizerConfig};
use crate::embeddings::{cosine, SentenceEncoder, SentenceIndex};
use crate::error::{Error, Result};
use crate::fuzzy::fuzzy_sentence_score;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub sentence_id: u64,
    pub text: String,
    pub score: f64,
    /// 1-based position within its batch.
    pub rank: usize,
}

/// Shared, read-only retrieval state: the sentence index, the encoder used for
/// queries, and the tokenized entry texts for fuzzy scoring.
pub struct SearchEngine {
    index: SentenceIndex,
    encoder: Arc<dyn SentenceEncoder>,
    tokenizer: TokenizerConfig,
    entry_tokens: Vec<Vec<String>>,
}

impl std::fmt::Debug for SearchEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SearchEngine")
            .field("entries", &self.index.len())
            .field("dim", &self.index.dim())
            .field("tokenizer", &self.tokenizer)
            .finish()
    }
}

impl SearchEngine {
    pub fn new(
        index: SentenceIndex,
        encoder: Arc<dyn SentenceEncoder>,
        tokenizer: TokenizerConfig,
    ) -> Result<Self> {
        if encoder.dim() != index.dim() {
            return Err(Error::Validation(format!(
                "model dimension {} does not match index dimension {}",
                encoder.dim(),
                index.dim()
            )));
        }
        let entry_tokens = index
            .entries()
            .iter()
            .map(|e| tokenize(&e.text, tokenizer))
            .collect();
        Ok(SearchEngine {
            index,
            encoder,
            tokenizer,
            entry_tokens,
        })
    }

    pub fn index(&self) -> &SentenceIndex {
        &self.index
    }

    pub fn tokenizer(&self) -> TokenizerConfig {
        self.tokenizer
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn create_session(&self, query_text: &str, mode: SearchMode, k: usize) -> Result<Session> {
        if k == 0 {
            return Err(Error::Validation("k must be at least 1".into()));
        }
        if let SearchMode::Hybrid { alpha } = mode {
            SearchMode::hybrid(alpha)?;
        }
        let tokens = tokenize(query_text, self.tokenizer);
        if tokens.is_empty() {
            return Err(Error::Validation("query is empty".into()));
        }
        let vector = mode.uses_vectors().then(|| {
            self.encoder
                .encode(&tokens)
                .into_iter()
                .map(f64::from)
                .collect()
        });
        Ok(Session::new(query_text, tokens, vector, mode, k))
    }

    fn score_at(&self, session: &Session, pos: usize) -> f64 {
        let entry = &self.index.entries()[pos];
        let cos = || {
            session
                .query_vector
                .as_deref()
                .map(|q| cosine(q, &entry.vector).unwrap_or(0.0))
                .unwrap_or(0.0)
        };
        let fuzzy = || fuzzy_sentence_score(&session.query_tokens, &self.entry_tokens[pos]).unwrap_or(0.0);
        match session.mode {
            SearchMode::Embedding => cos(),
            SearchMode::Fuzzy => fuzzy(),
            SearchMode::Hybrid { alpha } => alpha * (1.0 + cos()) / 2.0 + (1.0 - alpha) * fuzzy(),
        }
    }

    /// Score of sentence `sentence_id` under the session's current query.
    pub fn score(&self, session: &Session, sentence_id: u64) -> Option<f64> {
        self.position(sentence_id).map(|pos| self.score_at(session, pos))
    }

    fn position(&self, id: u64) -> Option<usize> {
        self.index.entries().binary_search_by_key(&id, |e| e.id).ok()
    }

    /// Replaces the query vector with the mean of the relevant sentences'
    /// vectors. With nothing marked relevant the vector is left unchanged.
    pub fn update_query_vector<'s>(&self, session: &'s mut Session) -> Option<&'s [f64]> {
        if session.mode.uses_vectors() && !session.relevant.is_empty() {
            let mut mean = vec![0.0f64; self.index.dim()];
            let mut n = 0usize;
            for entry in session.relevant.iter().filter_map(|&id| self.index.get(id)) {
                for (m, &x) in mean.iter_mut().zip(&entry.vector) {
                    *m += f64::from(x);
                }
                n += 1;
            }
            if n > 0 {
                mean.iter_mut().for_each(|m| *m /= n as f64);
                session.query_vector = Some(mean);
            }
        }
        session.query_vector.as_deref()
    }

    /// Returns the next batch of at most `k` unseen sentences, best first,
    /// ties broken by ascending id. From the second batch on, the query
    /// vector is first refreshed from the relevance judgments.
    pub fn next_results(&self, session: &mut Session) -> Vec<SearchResult> {
        if session.rounds > 0 {
            self.update_query_vector(session);
        }
        let mut scored: Vec<(f64, usize)> = self
            .index
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, e)| !session.shown.contains(&e.id))
            .map(|(pos, _)| (self.score_at(session, pos), pos))
            .collect();
        let entries = self.index.entries();
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| {
            b.0.total_cmp(&a.0).then(entries[a.1].id.cmp(&entries[b.1].id))
        };
        if scored.len() > session.k {
            scored.select_nth_unstable_by(session.k - 1, by_rank);
            scored.truncate(session.k);
        }
        scored.sort_by(by_rank);
        session.rounds += 1;
        scored
            .into_iter()
            .enumerate()
            .map(|(i, (score, pos))| {
                let entry = &entries[pos];
                session.shown.insert(entry.id);
                SearchResult {
                    sentence_id: entry.id,
                    text: entry.text.clone(),
                    score,
                    rank: i + 1,
                }
            })
            .collect()
    }

    /// Relevant sentences in first-marked order, rendered as `format`.
    pub fn export(&self, session: &Session, format: ExportFormat) -> Vec<u8> {
        let rows = session
            .relevant
            .iter()
            .filter_map(|&id| self.index.get(id))
            .map(|e| (e.id, e.text.as_str()));
        export::render(format, rows)
    }
}
