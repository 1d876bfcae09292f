use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use titl_core::fuzzy::FuzzyConfig;
use titl_core::{ExportFormat, Hyperparams, SearchMode, TokenizerConfig};

fn py_err(e: titl_core::Error) -> PyErr {
    match e {
        titl_core::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn tokenizer(lowercase: bool, strip_punctuation: bool) -> TokenizerConfig {
    TokenizerConfig {
        lowercase,
        strip_punctuation,
    }
}

#[pyfunction]
#[pyo3(signature = (text, lowercase=false, strip_punctuation=false))]
fn tokenize(text: &str, lowercase: bool, strip_punctuation: bool) -> Vec<String> {
    titl_core::tokenize(text, tokenizer(lowercase, strip_punctuation))
}

#[pyfunction]
fn levenshtein(a: &str, b: &str) -> usize {
    titl_core::levenshtein(a, b)
}

#[pyfunction]
fn normalized_similarity(a: &str, b: &str) -> f64 {
    titl_core::normalized_similarity(a, b)
}

#[pyfunction]
fn fuzzy_sentence_score(query_tokens: Vec<String>, sentence_tokens: Vec<String>) -> PyResult<f64> {
    titl_core::fuzzy_sentence_score(&query_tokens, &sentence_tokens).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (word, vocabulary, threshold=2, max_suggestions=5))]
fn suggest_corrections(
    word: &str,
    vocabulary: Vec<String>,
    threshold: usize,
    max_suggestions: usize,
) -> PyResult<Vec<(String, usize)>> {
    if max_suggestions == 0 {
        return Err(PyValueError::new_err("max_suggestions must be at least 1"));
    }
    let config = FuzzyConfig {
        suggestion_threshold: threshold,
        max_suggestions,
    };
    Ok(titl_core::suggest_corrections(word, &vocabulary, config))
}

#[pyfunction]
fn extract_ngrams(word: &str, ngram_min: usize, ngram_max: usize) -> Vec<String> {
    titl_core::extract_ngrams(word, ngram_min, ngram_max)
}

#[pyfunction]
fn hash_ngram(ngram: &str, buckets: u64) -> PyResult<u64> {
    if buckets == 0 {
        return Err(PyValueError::new_err("buckets must be positive"));
    }
    Ok(titl_core::hash_ngram(ngram, buckets))
}

#[pyfunction]
fn cosine(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    titl_core::cosine(&u, &v).map_err(py_err)
}

/// Trains a model on a one-sentence-per-line corpus file.
#[pyfunction]
#[pyo3(signature = (
    corpus_path, *, dim=100, window=5, negatives=5, epochs=10, lr=0.05, ngram_min=3,
    ngram_max=6, buckets=2_000_000, min_count=1, subsample=1e-4, seed=42,
    lowercase=false, strip_punctuation=false,
))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    corpus_path: &str,
    dim: u32,
    window: u32,
    negatives: u32,
    epochs: u32,
    lr: f64,
    ngram_min: u32,
    ngram_max: u32,
    buckets: u64,
    min_count: u32,
    subsample: f64,
    seed: u64,
    lowercase: bool,
    strip_punctuation: bool,
) -> PyResult<EmbeddingModel> {
    let hp = Hyperparams {
        dim,
        window,
        negatives,
        epochs,
        lr0: lr,
        ngram_min,
        ngram_max,
        buckets,
        min_count,
        subsample_t: subsample,
        seed,
    };
    let corpus = titl_core::load_corpus(corpus_path, tokenizer(lowercase, strip_punctuation))
        .map_err(py_err)?;
    let model = py.detach(|| titl_core::train(&corpus, &hp)).map_err(py_err)?;
    Ok(EmbeddingModel {
        inner: Arc::new(model),
    })
}

#[pyclass(frozen)]
struct EmbeddingModel {
    inner: Arc<titl_core::EmbeddingModel>,
}

#[pymethods]
impl EmbeddingModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(EmbeddingModel {
            inner: Arc::new(titl_core::load_model(path).map_err(py_err)?),
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        titl_core::save_model(&self.inner, path).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab().len()
    }

    fn word_vector(&self, word: &str) -> Vec<f32> {
        titl_core::embeddings::word_vector(&self.inner, word)
    }

    fn sentence_vector(&self, tokens: Vec<String>) -> Vec<f32> {
        titl_core::sentence_vector(&self.inner, &tokens)
    }
}

#[pyclass(frozen)]
struct SentenceIndex {
    inner: titl_core::SentenceIndex,
}

#[pymethods]
impl SentenceIndex {
    #[staticmethod]
    #[pyo3(signature = (model, corpus_path, lowercase=false, strip_punctuation=false))]
    fn build(
        model: &EmbeddingModel,
        corpus_path: &str,
        lowercase: bool,
        strip_punctuation: bool,
    ) -> PyResult<Self> {
        let corpus = titl_core::load_corpus(corpus_path, tokenizer(lowercase, strip_punctuation))
            .map_err(py_err)?;
        Ok(SentenceIndex {
            inner: titl_core::build_index(&model.inner, &corpus),
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(SentenceIndex {
            inner: titl_core::load_index(path).map_err(py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        titl_core::save_index(&self.inner, path).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(text, vector)` of sentence `id`, or None.
    fn entry(&self, id: u64) -> Option<(String, Vec<f32>)> {
        self.inner.get(id).map(|e| (e.text.clone(), e.vector.clone()))
    }
}

#[pyclass(frozen, get_all)]
struct SearchResult {
    sentence_id: u64,
    text: String,
    score: f64,
    rank: usize,
}

#[pymethods]
impl SearchResult {
    fn __repr__(&self) -> String {
        format!(
            "SearchResult(rank={}, sentence_id={}, score={:.4}, text={:?})",
            self.rank, self.sentence_id, self.score, self.text
        )
    }
}

#[pyclass(frozen)]
struct SearchEngine {
    inner: Arc<titl_core::SearchEngine>,
}

#[pymethods]
impl SearchEngine {
    #[new]
    #[pyo3(signature = (index, model, lowercase=false, strip_punctuation=false))]
    fn new(
        index: &SentenceIndex,
        model: &EmbeddingModel,
        lowercase: bool,
        strip_punctuation: bool,
    ) -> PyResult<Self> {
        let engine = titl_core::SearchEngine::new(
            index.inner.clone(),
            model.inner.clone(),
            tokenizer(lowercase, strip_punctuation),
        )
        .map_err(py_err)?;
        Ok(SearchEngine {
            inner: Arc::new(engine),
        })
    }

    #[pyo3(signature = (query, mode="embedding", k=5, alpha=None))]
    fn create_session(&self, query: &str, mode: &str, k: usize, alpha: Option<f64>) -> PyResult<Session> {
        let mode = SearchMode::parse(mode, alpha).map_err(py_err)?;
        let session = self.inner.create_session(query, mode, k).map_err(py_err)?;
        Ok(Session {
            inner: session,
            engine: Arc::clone(&self.inner),
        })
    }
}

#[pyclass]
struct Session {
    inner: titl_core::Session,
    engine: Arc<titl_core::SearchEngine>,
}

#[pymethods]
impl Session {
    #[getter]
    fn session_id(&self) -> String {
        self.inner.session_id.clone()
    }

    #[getter]
    fn query_tokens(&self) -> Vec<String> {
        self.inner.query_tokens.clone()
    }

    #[getter]
    fn query_vector(&self) -> Option<Vec<f64>> {
        self.inner.query_vector.clone()
    }

    #[getter]
    fn relevant(&self) -> Vec<u64> {
        self.inner.relevant.clone()
    }

    #[getter]
    fn irrelevant(&self) -> Vec<u64> {
        self.inner.irrelevant.iter().copied().collect()
    }

    #[getter]
    fn shown(&self) -> Vec<u64> {
        self.inner.shown.iter().copied().collect()
    }

    fn next_results(&mut self) -> Vec<SearchResult> {
        self.engine
            .next_results(&mut self.inner)
            .into_iter()
            .map(|r| SearchResult {
                sentence_id: r.sentence_id,
                text: r.text,
                score: r.score,
                rank: r.rank,
            })
            .collect()
    }

    fn record_feedback(&mut self, sentence_id: u64, relevant: bool) -> PyResult<()> {
        self.inner.record_feedback(sentence_id, relevant).map_err(py_err)
    }

    fn update_query_vector(&mut self) -> Option<Vec<f64>> {
        self.engine.update_query_vector(&mut self.inner).map(<[f64]>::to_vec)
    }

    #[pyo3(signature = (format="txt"))]
    fn export(&self, format: &str) -> PyResult<Vec<u8>> {
        let format: ExportFormat = format.parse().map_err(py_err)?;
        Ok(self.engine.export(&self.inner, format))
    }
}

#[pymodule]
fn titl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(fuzzy_sentence_score, m)?)?;
    m.add_function(wrap_pyfunction!(suggest_corrections, m)?)?;
    m.add_function(wrap_pyfunction!(extract_ngrams, m)?)?;
    m.add_function(wrap_pyfunction!(hash_ngram, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_class::<EmbeddingModel>()?;
    m.add_class::<SentenceIndex>()?;
    m.add_class::<SearchEngine>()?;
    m.add_class::<SearchResult>()?;
    m.add_class::<Session>()?;
    Ok(())
}
