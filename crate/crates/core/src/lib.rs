//! Interactive example-sentence retrieval over small, unannotated corpora.
//!
//! The crate is organised around the teacher-in-the-loop workflow:
//!
//! * [`corpus`] loads a one-sentence-per-line text file and tokenizes it.
//! * [`embeddings`] trains subword skip-gram word vectors, averages them into
//!   sentence vectors and persists models and sentence indexes.
//! * [`fuzzy`] provides edit-distance based orthographic matching.
//! * [`search`] runs feedback sessions: top-k retrieval over unseen sentences,
//!   relevance judgments and mean-of-relevant query updates, and export.

pub mod corpus;
pub mod embeddings;
mod error;
pub mod fuzzy;
pub mod search;

pub use corpus::{load_corpus, tokenize, Corpus, Sentence, TokenizerConfig};
pub use embeddings::{
    build_index, cosine, extract_ngrams, hash_ngram, load_index, load_model, save_index,
    save_model, sentence_vector, train, EmbeddingModel, Hyperparams, SentenceEncoder,
    SentenceIndex,
};
pub use error::{Error, Result};
pub use fuzzy::{fuzzy_sentence_score, levenshtein, normalized_similarity, suggest_corrections};
pub use search::{ExportFormat, SearchEngine, SearchMode, SearchResult, Session};
