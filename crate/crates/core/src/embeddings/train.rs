use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::Matrix;
use super::model::{EmbeddingModel, Hyperparams, InputRows, Vocab};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Smallest learning rate as a fraction of `lr0`.
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    /// Mean loss per (center, context) pair, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    pub vocab_size: usize,
    pub token_count: usize,
}

impl TrainingReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(0.0)
    }
}

pub fn train(corpus: &Corpus, hp: &Hyperparams) -> Result<EmbeddingModel> {
    train_with_report(corpus, hp).map(|(model, _)| model)
}

/// Trains a subword skip-gram model with negative sampling.
///
/// Single-threaded and driven by one ChaCha8 stream seeded from `hp.seed`, so
/// identical inputs produce a bit-identical model.
pub fn train_with_report(
    corpus: &Corpus,
    hp: &Hyperparams,
) -> Result<(EmbeddingModel, TrainingReport)> {
    hp.validate()?;
    if corpus.is_empty() || corpus.token_count == 0 {
        return Err(Error::Training("corpus is empty".into()));
    }
    let vocab = build_vocab(corpus, hp.min_count)?;
    let dim = hp.dim as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);

    let bound = 1.0 / hp.dim as f32;
    let init = Uniform::new_inclusive(-bound, bound).expect("valid bounds");
    let mut random_matrix = |rows: usize| {
        let mut m = Matrix::zeros(rows, dim);
        m.as_mut_slice()
            .iter_mut()
            .for_each(|x| *x = init.sample(&mut rng));
        m
    };
    let input_words = random_matrix(vocab.len());
    let input_buckets = random_matrix(hp.buckets as usize);
    let output = Matrix::zeros(vocab.len(), dim);
    let mut model = EmbeddingModel::from_parts(*hp, vocab, input_words, input_buckets, output)?;

    let centers: Vec<InputRows> = (0..model.vocab.len())
        .map(|i| InputRows {
            word: Some(i),
            buckets: model.ngram_buckets(model.vocab.word(i)),
        })
        .collect();
    let sentences: Vec<Vec<usize>> = corpus
        .sentences
        .iter()
        .map(|s| s.tokens.iter().filter_map(|t| model.vocab.get(t)).collect())
        .collect();

    let total_count: u64 = model.vocab.iter().map(|(_, c)| c).sum();
    let keep_prob: Vec<f64> = model
        .vocab
        .iter()
        .map(|(_, count)| {
            if hp.subsample_t <= 0.0 {
                1.0
            } else {
                let ratio = hp.subsample_t / (count as f64 / total_count as f64);
                (ratio.sqrt() + ratio).min(1.0)
            }
        })
        .collect();
    let noise = if model.vocab.len() > 1 {
        let weights = model.vocab.iter().map(|(_, c)| (c as f64).powf(0.75));
        Some(WeightedIndex::new(weights).map_err(|e| Error::Training(e.to_string()))?)
    } else {
        None
    };

    let total_tokens = u64::from(hp.epochs) * corpus.token_count as u64;
    let mut processed = 0u64;
    let mut h = vec![0.0f32; dim];
    let mut grad_h = vec![0.0f32; dim];
    let mut negatives = Vec::with_capacity(hp.negatives as usize);
    let mut kept = Vec::new();
    let mut epoch_losses = Vec::with_capacity(hp.epochs as usize);

    for _ in 0..hp.epochs {
        let mut loss_sum = 0.0f64;
        let mut pairs = 0u64;
        for (ids, sentence) in sentences.iter().zip(&corpus.sentences) {
            let progress = processed as f64 / total_tokens as f64;
            let lr = (hp.lr0 * (1.0 - progress).max(MIN_LR_FRACTION)) as f32;
            processed += sentence.tokens.len() as u64;

            kept.clear();
            for &id in ids {
                if keep_prob[id] >= 1.0 || rng.random::<f64>() < keep_prob[id] {
                    kept.push(id);
                }
            }
            for i in 0..kept.len() {
                let span = rng.random_range(1..=hp.window as usize);
                let lo = i.saturating_sub(span);
                let hi = (i + span).min(kept.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let context = kept[j];
                    negatives.clear();
                    if let Some(noise) = &noise {
                        while negatives.len() < hp.negatives as usize {
                            let n = noise.sample(&mut rng);
                            if n != context {
                                negatives.push(n);
                            }
                        }
                    }
                    let loss = model.sgd_step_with(
                        &centers[kept[i]],
                        context,
                        &negatives,
                        lr,
                        &mut h,
                        &mut grad_h,
                    );
                    loss_sum += f64::from(loss);
                    pairs += 1;
                }
            }
        }
        epoch_losses.push(if pairs == 0 {
            0.0
        } else {
            loss_sum / pairs as f64
        });
    }

    if model
        .input_words
        .as_slice()
        .iter()
        .chain(model.input_buckets.as_slice())
        .chain(model.output.as_slice())
        .any(|x| !x.is_finite())
    {
        return Err(Error::Training("training diverged (non-finite weights)".into()));
    }

    let report = TrainingReport {
        epoch_losses,
        vocab_size: model.vocab.len(),
        token_count: corpus.token_count,
    };
    Ok((model, report))
}

fn build_vocab(corpus: &Corpus, min_count: u32) -> Result<Vocab> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for token in corpus.sentences.iter().flat_map(|s| &s.tokens) {
        *counts.entry(token.as_str()).or_default() += 1;
    }
    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= u64::from(min_count))
        .map(|(w, c)| (w.to_owned(), c))
        .collect();
    if entries.is_empty() {
        return Err(Error::Training(format!(
            "no word occurs at least {min_count} times"
        )));
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocab::from_entries(entries)
}
