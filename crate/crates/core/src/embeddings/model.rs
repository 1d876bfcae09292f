use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::ngrams::{extract_ngrams, hash_ngram};
use crate::error::{Error, Result};

/// Training hyperparameters. Defaults follow the usual subword skip-gram
/// settings, except `min_count = 1` so rare words in small corpora keep their
/// own vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dim: u32,
    pub window: u32,
    pub negatives: u32,
    pub epochs: u32,
    pub lr0: f64,
    pub ngram_min: u32,
    pub ngram_max: u32,
    pub buckets: u64,
    pub min_count: u32,
    pub subsample_t: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 10,
            lr0: 0.05,
            ngram_min: 3,
            ngram_max: 6,
            buckets: 2_000_000,
            min_count: 1,
            subsample_t: 1e-4,
            seed: 42,
        }
    }
}

impl Hyperparams {
    /// Checks the field invariants, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", u64::from(self.dim)),
            ("window", u64::from(self.window)),
            ("negatives", u64::from(self.negatives)),
            ("epochs", u64::from(self.epochs)),
            ("ngram_min", u64::from(self.ngram_min)),
            ("ngram_max", u64::from(self.ngram_max)),
            ("buckets", self.buckets),
            ("min_count", u64::from(self.min_count)),
        ];
        for (field, value) in positive {
            if value == 0 {
                return Err(Error::Validation(format!("{field} must be positive")));
            }
        }
        if self.ngram_min > self.ngram_max {
            return Err(Error::Validation(format!(
                "ngram_min ({}) exceeds ngram_max ({})",
                self.ngram_min, self.ngram_max
            )));
        }
        if !(self.lr0.is_finite() && self.lr0 > 0.0) {
            return Err(Error::Validation("lr0 must be a positive real".into()));
        }
        if !(self.subsample_t.is_finite() && self.subsample_t >= 0.0) {
            return Err(Error::Validation(
                "subsample_t must be a non-negative real".into(),
            ));
        }
        Ok(())
    }
}

/// Vocabulary ordered by descending count, ties by word.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.counts == other.counts
    }
}

impl Vocab {
    pub fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut vocab = Vocab::default();
        for (word, count) in entries {
            if vocab.index.contains_key(&word) {
                return Err(Error::Validation(format!("duplicate vocabulary word {word:?}")));
            }
            vocab.index.insert(word.clone(), vocab.words.len());
            vocab.words.push(word);
            vocab.counts.push(count);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words.iter().map(String::as_str).zip(self.counts.iter().copied())
    }
}

/// A trained subword skip-gram model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) hyperparams: Hyperparams,
    pub(crate) vocab: Vocab,
    pub(crate) input_words: Matrix,
    pub(crate) input_buckets: Matrix,
    pub(crate) output: Matrix,
}

/// Input rows that are averaged into a word's representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputRows {
    pub word: Option<usize>,
    pub buckets: Vec<usize>,
}

impl InputRows {
    pub fn len(&self) -> usize {
        self.buckets.len() + usize::from(self.word.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl EmbeddingModel {
    /// Assembles a model from its parts, checking shapes and finiteness.
    pub fn from_parts(
        hyperparams: Hyperparams,
        vocab: Vocab,
        input_words: Matrix,
        input_buckets: Matrix,
        output: Matrix,
    ) -> Result<Self> {
        hyperparams.validate()?;
        let dim = hyperparams.dim as usize;
        let expect = [
            ("input_word_vectors", &input_words, vocab.len()),
            ("input_bucket_vectors", &input_buckets, hyperparams.buckets as usize),
            ("output_vectors", &output, vocab.len()),
        ];
        for (name, m, rows) in expect {
            if m.rows() != rows || m.cols() != dim {
                return Err(Error::Validation(format!(
                    "{name} is {}x{}, expected {rows}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
            if m.as_slice().iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("{name} has non-finite values")));
            }
        }
        Ok(EmbeddingModel {
            hyperparams,
            vocab,
            input_words,
            input_buckets,
            output,
        })
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.hyperparams.dim as usize
    }

    pub fn input_word_vectors(&self) -> &Matrix {
        &self.input_words
    }

    pub fn input_bucket_vectors(&self) -> &Matrix {
        &self.input_buckets
    }

    pub fn output_vectors(&self) -> &Matrix {
        &self.output
    }

    pub fn input_word_vectors_mut(&mut self) -> &mut Matrix {
        &mut self.input_words
    }

    pub fn input_bucket_vectors_mut(&mut self) -> &mut Matrix {
        &mut self.input_buckets
    }

    pub fn output_vectors_mut(&mut self) -> &mut Matrix {
        &mut self.output
    }

    /// Bucket ids of the character n-grams of `word`.
    pub fn ngram_buckets(&self, word: &str) -> Vec<usize> {
        let hp = &self.hyperparams;
        extract_ngrams(word, hp.ngram_min as usize, hp.ngram_max as usize)
            .iter()
            .map(|g| hash_ngram(g, hp.buckets) as usize)
            .collect()
    }

    pub fn input_rows(&self, word: &str) -> InputRows {
        InputRows {
            word: self.vocab.get(word),
            buckets: self.ngram_buckets(word),
        }
    }

    /// Mean of the input vectors listed in `rows`, or zeros if there are none.
    pub fn compose(&self, rows: &InputRows) -> Vec<f32> {
        let dim = self.dim();
        let mut acc = vec![0.0f64; dim];
        let mut add = |row: &[f32]| {
            for (a, &x) in acc.iter_mut().zip(row) {
                *a += f64::from(x);
            }
        };
        if let Some(w) = rows.word {
            add(self.input_words.row(w));
        }
        for &b in &rows.buckets {
            add(self.input_buckets.row(b));
        }
        let n = rows.len();
        if n == 0 {
            return vec![0.0; dim];
        }
        acc.into_iter().map(|a| (a / n as f64) as f32).collect()
    }
}

/// Vector for `word`: mean of its whole-word vector (if in vocabulary) and its
/// n-gram bucket vectors. A word with no n-grams and no vocabulary entry maps
/// to the zero vector.
pub fn word_vector(model: &EmbeddingModel, word: &str) -> Vec<f32> {
    model.compose(&model.input_rows(word))
}

/// Component-wise mean of the word vectors of `tokens`; zeros when empty.
pub fn sentence_vector<S: AsRef<str>>(model: &EmbeddingModel, tokens: &[S]) -> Vec<f32> {
    let dim = model.dim();
    if tokens.is_empty() {
        return vec![0.0; dim];
    }
    let mut acc = vec![0.0f64; dim];
    for token in tokens {
        for (a, x) in acc.iter_mut().zip(word_vector(model, token.as_ref())) {
            *a += f64::from(x);
        }
    }
    let n = tokens.len() as f64;
    acc.into_iter().map(|a| (a / n) as f32).collect()
}

/// Anything that maps a token sequence to a fixed-dimension vector.
pub trait SentenceEncoder: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, tokens: &[String]) -> Vec<f32>;
}

impl SentenceEncoder for EmbeddingModel {
    fn dim(&self) -> usize {
        EmbeddingModel::dim(self)
    }

    fn encode(&self, tokens: &[String]) -> Vec<f32> {
        sentence_vector(self, tokens)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Model with the given vocabulary and every input/output row filled by `fill(row_index)`.
    pub(crate) fn toy_model(
        words: &[&str],
        dim: u32,
        buckets: u64,
        fill: impl Fn(usize, usize) -> f32,
    ) -> EmbeddingModel {
        let hp = Hyperparams {
            dim,
            buckets,
            ngram_min: 3,
            ngram_max: 4,
            ..Hyperparams::default()
        };
        let d = dim as usize;
        let vocab =
            Vocab::from_entries(words.iter().map(|w| (w.to_string(), 1)).collect()).unwrap();
        let mk = |rows: usize, offset: usize| {
            let data = (0..rows * d).map(|i| fill(offset + i / d, i % d)).collect();
            Matrix::from_vec(rows, d, data)
        };
        EmbeddingModel::from_parts(
            hp,
            vocab,
            mk(words.len(), 0),
            mk(buckets as usize, 1000),
            Matrix::zeros(words.len(), d),
        )
        .unwrap()
    }

    #[test]
    fn identical_contributors_give_that_vector() {
        let model = toy_model(&["x"], 3, 4, |_, c| [0.5, -1.0, 2.0][c]);
        assert_eq!(word_vector(&model, "x"), vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn oov_word_uses_ngrams_only() {
        let model = toy_model(&["abc"], 2, 16, |r, c| (r * 2 + c) as f32);
        let rows = model.input_rows("abd");
        assert_eq!(rows.word, None);
        let buckets = model.ngram_buckets("abd");
        let mut expected = [0.0f64; 2];
        for &b in &buckets {
            for (c, e) in expected.iter_mut().enumerate() {
                *e += f64::from(model.input_bucket_vectors().row(b)[c]);
            }
        }
        let expected: Vec<f32> = expected
            .iter()
            .map(|e| (e / buckets.len() as f64) as f32)
            .collect();
        assert_eq!(word_vector(&model, "abd"), expected);
    }

    #[test]
    fn oov_sharing_ngrams_matches_ngram_mean() {
        // "abc" is in vocabulary; an OOV word with the same n-grams is "abc"
        // itself in a model without that vocabulary entry.
        let with = toy_model(&["abc"], 2, 16, |r, c| (r + c) as f32 * 0.25);
        let without = toy_model(&["zzz"], 2, 16, |r, c| (r + c) as f32 * 0.25);
        let rows = with.input_rows("abc");
        let ngram_only = with.compose(&InputRows {
            word: None,
            buckets: rows.buckets,
        });
        assert_eq!(word_vector(&without, "abc"), ngram_only);
    }

    #[test]
    fn too_short_oov_word_is_zero() {
        let mut model = toy_model(&["abc"], 2, 4, |_, _| 1.0);
        model.hyperparams.ngram_min = 4;
        model.hyperparams.ngram_max = 6;
        assert_eq!(word_vector(&model, "a"), vec![0.0, 0.0]);
    }

    #[test]
    fn sentence_vector_examples() {
        let mut model = toy_model(&["w1", "w2"], 2, 1, |_, _| 0.0);
        model.input_words.row_mut(0).copy_from_slice(&[1.0, 0.0]);
        model.input_words.row_mut(1).copy_from_slice(&[0.0, 1.0]);
        // Disable n-grams so word vectors are the whole-word rows.
        model.hyperparams.ngram_min = 10;
        model.hyperparams.ngram_max = 10;
        assert_eq!(sentence_vector(&model, &["w1", "w2"]), vec![0.5, 0.5]);
        assert_eq!(sentence_vector::<&str>(&model, &[]), vec![0.0, 0.0]);
        assert_eq!(sentence_vector(&model, &["w2"]), word_vector(&model, "w2"));
    }

    #[test]
    fn validate_names_field() {
        let hp = Hyperparams {
            ngram_min: 7,
            ..Hyperparams::default()
        };
        assert!(hp.validate().unwrap_err().to_string().contains("ngram_min"));
        let hp = Hyperparams {
            dim: 0,
            ..Hyperparams::default()
        };
        assert!(hp.validate().unwrap_err().to_string().contains("dim"));
    }

    proptest! {
        #[test]
        fn sentence_vector_is_order_invariant(
            tokens in proptest::collection::vec("[a-e']{1,5}", 0..8),
            seed in any::<u64>(),
        ) {
            let model = toy_model(&["ab", "cd'", "e"], 4, 32, |r, c| ((r * 31 + c * 7) % 13) as f32 - 6.0);
            let mut permuted = tokens.clone();
            // deterministic shuffle
            let n = permuted.len();
            if n > 1 {
                for i in 0..n {
                    let j = (seed.wrapping_mul(i as u64 + 1) % n as u64) as usize;
                    permuted.swap(i, j);
                }
            }
            let a = sentence_vector(&model, &tokens);
            let b = sentence_vector(&model, &permuted);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-6 * (1.0 + x.abs()));
            }
        }
    }
}
