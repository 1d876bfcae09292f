//! Orthographic matching by edit distance.
//!
//! Distances count Unicode scalar values, so apostrophes, digits and
//! multi-byte letters are single symbols.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzyConfig {
    /// Largest edit distance a suggestion may have (inclusive).
    pub suggestion_threshold: usize,
    pub max_suggestions: usize,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        FuzzyConfig {
            suggestion_threshold: 2,
            max_suggestions: 5,
        }
    }
}

/// Levenshtein distance with unit costs, using two rolling rows.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (long, short) = if a.len() >= b.len() { (&a, &b) } else { (&b, &a) };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0usize; short.len() + 1];
    for (i, &lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let substitution = prev[j] + usize::from(lc != sc);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// `1 - d(a, b) / max(|a|, |b|)`; two empty strings are identical.
pub fn normalized_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// Mean over query tokens of the best similarity to any sentence token.
pub fn fuzzy_sentence_score<Q, S>(query_tokens: &[Q], sentence_tokens: &[S]) -> Result<f64>
where
    Q: AsRef<str>,
    S: AsRef<str>,
{
    if query_tokens.is_empty() {
        return Err(Error::Contract("fuzzy score needs at least one query token".into()));
    }
    if sentence_tokens.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = query_tokens
        .iter()
        .map(|q| {
            sentence_tokens
                .iter()
                .map(|s| normalized_similarity(q.as_ref(), s.as_ref()))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(total / query_tokens.len() as f64)
}

/// Vocabulary words within `suggestion_threshold` edits of `word`, nearest
/// first with ties broken lexicographically, capped at `max_suggestions`.
/// An exact match is returned alone.
pub fn suggest_corrections<I, S>(word: &str, vocabulary: I, config: FuzzyConfig) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut hits: Vec<(String, usize)> = Vec::new();
    for candidate in vocabulary {
        let candidate = candidate.as_ref();
        if candidate == word {
            return vec![(candidate.to_owned(), 0)];
        }
        // The length difference is a lower bound on the distance.
        let (lw, lc) = (word.chars().count(), candidate.chars().count());
        if lw.abs_diff(lc) > config.suggestion_threshold {
            continue;
        }
        let d = levenshtein(word, candidate);
        if d <= config.suggestion_threshold {
            hits.push((candidate.to_owned(), d));
        }
    }
    hits.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    hits.dedup();
    hits.truncate(config.max_suggestions.max(1));
    hits
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    /// Full-matrix recurrence, kept separate from the rolling-row version.
    #[allow(clippy::needless_range_loop)]
    fn dp_oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("he'ih", "he'ihce'"), 3);
        assert_eq!(dp_oracle("kitten", "sitting"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("ä", "a"), 1);
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(normalized_similarity("abc", "abc"), 1.0);
        assert_eq!(normalized_similarity("a", "b"), 0.0);
        assert_eq!(normalized_similarity("he'ih", "he'ihce'"), 0.625);
        assert_eq!(normalized_similarity("", ""), 1.0);
    }

    #[test]
    fn sentence_score_examples() {
        assert_eq!(fuzzy_sentence_score(&["abc"], &["abc", "xyz"]).unwrap(), 1.0);
        assert_eq!(fuzzy_sentence_score(&["abc", "def"], &["abc"]).unwrap(), 0.5);
        assert_eq!(fuzzy_sentence_score(&["abc"], &[] as &[&str]).unwrap(), 0.0);
        assert!(fuzzy_sentence_score(&[] as &[&str], &["abc"]).is_err());

        // d(he'ih, ceese') = 5 over 6 chars; d(he'ih, he'ihce'ciiciinen) = 12 over 17.
        assert_eq!(dp_oracle("he'ih", "ceese'"), 5);
        assert_eq!(dp_oracle("he'ih", "he'ihce'ciiciinen"), 12);
        let expected = (1.0 - 5.0 / 6.0f64).max(1.0 - 12.0 / 17.0);
        let got = fuzzy_sentence_score(&["he'ih"], &["ceese'", "he'ihce'ciiciinen"]).unwrap();
        assert_eq!(got, expected);
        assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn suggestion_examples() {
        let vocab: BTreeSet<&str> = ["cat", "dog"].into_iter().collect();
        assert_eq!(
            suggest_corrections("cat", &vocab, FuzzyConfig::default()),
            vec![("cat".to_string(), 0)]
        );
        assert_eq!(dp_oracle("cot", "cat"), 1);
        assert_eq!(dp_oracle("cot", "dog"), 2);
        let one = FuzzyConfig {
            suggestion_threshold: 1,
            ..FuzzyConfig::default()
        };
        assert_eq!(
            suggest_corrections("cot", &vocab, one),
            vec![("cat".to_string(), 1)]
        );
    }

    #[test]
    fn suggestions_capped_at_five() {
        let vocab = ["bat", "cat", "eat", "fat", "hat", "mat", "pat"];
        let got = suggest_corrections("at", vocab, FuzzyConfig::default());
        assert_eq!(got.len(), 5);
        let words: Vec<&str> = got.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, vec!["bat", "cat", "eat", "fat", "hat"]);
    }

    fn short_unicode() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![Just('a'), Just('b'), Just('\''), Just('3'), Just('ä'), Just('日'), any::<char>()],
            0..10,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn matches_oracle(a in short_unicode(), b in short_unicode()) {
            prop_assert_eq!(levenshtein(&a, &b), dp_oracle(&a, &b));
        }

        #[test]
        fn metric_axioms(a in short_unicode(), b in short_unicode(), c in short_unicode()) {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
            let (la, lb) = (a.chars().count(), b.chars().count());
            prop_assert!(la.abs_diff(lb) <= ab && ab <= la.max(lb));
        }

        #[test]
        fn verbatim_tokens_score_one(
            query in proptest::collection::vec("[a-c']{1,4}", 1..4),
            extra in proptest::collection::vec("[a-z]{1,6}", 0..4),
        ) {
            let mut sentence = extra.clone();
            sentence.extend(query.iter().cloned());
            prop_assert_eq!(fuzzy_sentence_score(&query, &sentence).unwrap(), 1.0);
        }

        #[test]
        fn suggestions_respect_limits(
            word in "[a-c]{0,4}",
            vocab in proptest::collection::btree_set("[a-c]{0,5}", 0..30),
            threshold in 0usize..4,
            max in 1usize..6,
        ) {
            let config = FuzzyConfig { suggestion_threshold: threshold, max_suggestions: max };
            let got = suggest_corrections(&word, &vocab, config);
            prop_assert!(got.len() <= max);
            for (w, d) in &got {
                prop_assert!(*d <= threshold);
                prop_assert_eq!(*d, dp_oracle(&word, w));
            }
            for pair in got.windows(2) {
                prop_assert!((pair[0].1, &pair[0].0) < (pair[1].1, &pair[1].0));
            }
        }
    }
}
