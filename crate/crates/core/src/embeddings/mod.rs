//! Subword skip-gram embeddings and sentence vectors.
//!
//! Words are represented by the mean of a whole-word vector (for in-vocabulary
//! words) and the hashed vectors of their character n-grams, so unseen word
//! forms still receive a vector. Sentence vectors are the mean of their word
//! vectors.

mod index;
mod io;
mod matrix;
mod model;
mod ngrams;
mod sgd;
mod train;

pub use index::{build_index, IndexEntry, SentenceIndex};
pub use io::{
    load_index, load_model, read_index, read_model, save_index, save_model, write_index,
    write_model, INDEX_MAGIC, INDEX_VERSION, MODEL_MAGIC, MODEL_VERSION,
};
pub use matrix::Matrix;
pub use model::{sentence_vector, word_vector, EmbeddingModel, Hyperparams, SentenceEncoder, Vocab};
pub use ngrams::{extract_ngrams, hash_ngram};
pub use sgd::{log_sigmoid, negative_sampling_gradient, skipgram_step};
pub use train::{train, train_with_report, TrainingReport};

use crate::error::{Error, Result};

/// Cosine similarity of two equal-length vectors, computed in `f64`.
///
/// Returns 0 when either vector has zero norm, so an all-OOV query ranks below
/// any genuine match instead of producing NaN.
pub fn cosine<A, B>(u: &[A], v: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if u.len() != v.len() {
        return Err(Error::Contract(format!(
            "cosine of vectors with dimensions {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b): (f64, f64) = (a.into(), b.into());
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}
