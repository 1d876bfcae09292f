#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use titl_core::{
    build_index, train, Corpus, EmbeddingModel, Hyperparams, SearchEngine, SentenceIndex,
    TokenizerConfig,
};
use titl_service::{serve_on, AppState, ServiceConfig};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub const QUERY: &str = "ceese' he'ihneestoyoohobee hinii3ebio";
pub const SECOND: &str = "ceese' hookuhu'eeno he'ihce'ciiciinen";

const WORDS: &[&str] = &[
    "ceese'", "he'ihbii", "he'ihce'no", "hinii3ebio", "nih'ii3", "hee3oohok", "noh", "wohei",
    "beebeet", "nuhu'", "hiit", "neneeni3i", "toyoohobee", "koox", "tih'ii", "hoo3oo'",
    "he'ihnoo", "bee3", "nii'ehi", "cee'iini", "hookuhu'eeno", "he'ihneestoyoohobee",
];

/// Synthetic corpus of distinct lines containing the two example sentences.
pub fn corpus_lines(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<String> = HashSet::new();
    let mut lines = Vec::new();
    while lines.len() < n {
        let len = rng.random_range(3..=7);
        let line: Vec<&str> = (0..len).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
        let line = line.join(" ");
        if line != QUERY && line != SECOND && seen.insert(line.clone()) {
            lines.push(line);
        }
    }
    lines.insert(n / 3, QUERY.to_string());
    lines.insert(n / 2, SECOND.to_string());
    lines
}

pub fn small_hyperparams() -> Hyperparams {
    Hyperparams {
        dim: 16,
        buckets: 20_000,
        epochs: 5,
        seed: 11,
        ..Hyperparams::default()
    }
}

pub struct Fixture {
    pub corpus: Corpus,
    pub model: Arc<EmbeddingModel>,
    pub index: SentenceIndex,
}

impl Fixture {
    pub fn new(sentences: usize) -> Self {
        let lines = corpus_lines(sentences, 5);
        let corpus = Corpus::from_lines(&lines, TokenizerConfig::default(), "fixture");
        let model = Arc::new(train(&corpus, &small_hyperparams()).unwrap());
        let index = build_index(&model, &corpus);
        Fixture {
            corpus,
            model,
            index,
        }
    }

    pub fn engine(&self) -> SearchEngine {
        SearchEngine::new(
            self.index.clone(),
            self.model.clone(),
            TokenizerConfig::default(),
        )
        .unwrap()
    }

    pub fn sentence_id(&self, text: &str) -> u64 {
        self.corpus
            .sentences
            .iter()
            .find(|s| s.text == text)
            .map(|s| s.id)
            .unwrap()
    }
}

pub struct TestServer {
    pub base: String,
    pub state: Arc<AppState>,
    shutdown: Option<oneshot::Sender<()>>,
    handle: Option<JoinHandle<Result<(), titl_service::ServiceError>>>,
}

impl TestServer {
    pub async fn start(engine: SearchEngine, config: ServiceConfig) -> Self {
        let state = Arc::new(AppState::new(Arc::new(engine), &config).unwrap());
        Self::start_with_state(state, config).await
    }

    pub async fn start_with_state(state: Arc<AppState>, config: ServiceConfig) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = oneshot::channel();
        let served = Arc::clone(&state);
        let handle = tokio::spawn(async move {
            serve_on(listener, served, &config, async {
                let _ = rx.await;
            })
            .await
        });
        TestServer {
            base,
            state,
            shutdown: Some(tx),
            handle: Some(handle),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub async fn stop(mut self) -> Result<(), titl_service::ServiceError> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.handle.take().unwrap().await.unwrap()
    }
}
