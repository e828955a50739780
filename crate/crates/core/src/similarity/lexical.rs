use std::collections::BTreeMap;

use super::{cosine_or_warn, tokenize, BackendKind, EmbeddingVector, SimilarityBackend, SimilarityError};

/// Token to vector index. Ordered so that a vocabulary built from `(a, b)`
/// and from `(b, a)` is the same map.
pub type Vocabulary = BTreeMap<String, usize>;

pub fn build_vocabulary<'a, I>(token_lists: I) -> Vocabulary
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut words: Vec<&String> = token_lists.into_iter().flatten().collect();
    words.sort();
    words.dedup();
    words.into_iter().enumerate().map(|(i, w)| (w.clone(), i)).collect()
}

/// Term-frequency vector of `tokens` over `vocabulary`. Tokens outside the
/// vocabulary are ignored.
pub fn embed_lexical(tokens: &[String], vocabulary: &Vocabulary) -> EmbeddingVector {
    let mut counts = vec![0.0; vocabulary.len()];
    for token in tokens {
        if let Some(&i) = vocabulary.get(token) {
            counts[i] += 1.0;
        }
    }
    EmbeddingVector::new(counts)
}

/// Bag-of-words cosine over the joint vocabulary of the two texts.
#[derive(Debug, Clone, Default)]
pub struct LexicalBackend {
    stopwords: Vec<String>,
}

impl LexicalBackend {
    pub fn new(stopwords: Vec<String>) -> Self {
        Self {
            stopwords: stopwords.into_iter().map(|s| s.to_lowercase()).collect(),
        }
    }
}

impl SimilarityBackend for LexicalBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Lexical
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        let ta = tokenize(a, &self.stopwords);
        let tb = tokenize(b, &self.stopwords);
        let vocab = build_vocabulary([ta.as_slice(), tb.as_slice()]);
        cosine_or_warn(&embed_lexical(&ta, &vocab), &embed_lexical(&tb, &vocab), a, b)
    }
}
