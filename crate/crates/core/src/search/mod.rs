//! Teacher-in-the-loop search sessions.
//!
//! A session starts from a query sentence, returns the `k` best unseen
//! sentences per round, and after each round replaces its query vector with
//! the mean of the vectors of every sentence judged relevant so far.
//! Irrelevant sentences are only excluded from later rounds.

mod engine;
mod export;
mod session;

pub use engine::{SearchEngine, SearchResult};
pub use export::ExportFormat;
pub use session::{SearchMode, Session};
