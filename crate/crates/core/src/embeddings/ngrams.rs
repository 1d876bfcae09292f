const FNV_OFFSET: u32 = 0x811c_9dc5;
const FNV_PRIME: u32 = 0x0100_0193;

/// Character n-grams of `<word>` with lengths `ngram_min..=ngram_max`,
/// shortest first and left to right within each length.
///
/// Lengths are counted in Unicode scalar values. The wrapped form itself is
/// included when its length falls in range, so every non-empty word has at
/// least one n-gram whenever `ngram_min <= len(word) + 2`.
pub fn extract_ngrams(word: &str, ngram_min: usize, ngram_max: usize) -> Vec<String> {
    let wrapped: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for n in ngram_min.max(1)..=ngram_max.min(wrapped.len()) {
        for window in wrapped.windows(n) {
            out.push(window.iter().collect());
        }
    }
    out
}

/// FNV-1a (32-bit) of the UTF-8 bytes of `ngram`, reduced modulo `buckets`.
pub fn hash_ngram(ngram: &str, buckets: u64) -> u64 {
    assert!(buckets > 0, "bucket count must be positive");
    let hash = ngram.bytes().fold(FNV_OFFSET, |h, b| {
        (h ^ u32::from(b)).wrapping_mul(FNV_PRIME)
    });
    u64::from(hash) % buckets
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_shortest_first() {
        assert_eq!(
            extract_ngrams("he'ih", 3, 4),
            vec!["<he", "he'", "e'i", "'ih", "ih>", "<he'", "he'i", "e'ih", "'ih>"]
        );
        assert_eq!(extract_ngrams("ab", 3, 3), vec!["<ab", "ab>"]);
    }

    #[test]
    fn short_words() {
        assert_eq!(extract_ngrams("a", 3, 4), vec!["<a>"]);
        assert!(extract_ngrams("a", 4, 6).is_empty());
    }

    #[test]
    fn counts_characters_not_bytes() {
        let grams = extract_ngrams("äö", 4, 4);
        assert_eq!(grams, vec!["<äö>"]);
    }

    // Reference FNV-1a values: offset basis 0x811c9dc5, prime 0x01000193.
    #[test]
    fn fnv1a_reference_values() {
        assert_eq!(hash_ngram("abc", 1 << 32), 0x1A47_E90B);
        assert_eq!(hash_ngram("", 1 << 32), 0x811c_9dc5);
        assert_eq!(hash_ngram("a", 1 << 32), 0xe40c_292c);
    }

    #[test]
    fn modulo_and_determinism() {
        assert_eq!(hash_ngram("<he'", 1), 0);
        assert_eq!(hash_ngram("<he'", 1000), hash_ngram("<he'", 1000));
        assert!(hash_ngram("<he'", 7) < 7);
    }
}
