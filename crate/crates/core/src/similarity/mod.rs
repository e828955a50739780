//! Semantic similarity between construct texts.
//!
//! Every backend maps a pair of texts to a similarity in `[0, 1]`. Three of
//! them embed text into vectors and take the cosine (lexical counts, pooled
//! word vectors, a remote embedding service); the fixture backend replays
//! pinned pair values instead.

mod fixture;
mod lexical;
mod remote;
mod wordvec;

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

pub use fixture::{load_fixture_similarities, parse_fixture_similarities, FixtureBackend, FixtureTable};
pub use lexical::{build_vocabulary, embed_lexical, LexicalBackend, Vocabulary};
pub use remote::{RemoteBackend, RemoteConfig};
pub use wordvec::{embed_wordvector, load_word_vectors, parse_word_vectors, Pooled, WordVectorBackend, WordVectors};

#[derive(Debug, thiserror::Error)]
pub enum SimilarityError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot compare empty text")]
    EmptyText,
    #[error("no fixture similarity for pair (\"{a}\", \"{b}\")")]
    MissingFixture { a: String, b: String },
    #[error("embedding backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    InvalidFile { path: String, message: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A dense embedding. An all-zero vector is the out-of-vocabulary sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(dimension: usize) -> Self {
        Self(vec![0.0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

impl From<Vec<f64>> for EmbeddingVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Result of [`cosine_similarity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub value: f64,
    /// Set when either vector has zero norm; `value` is then 0.
    pub zero_norm: bool,
}

/// Cosine of the angle between `u` and `v`, clamped to `[-1, 1]`.
///
/// The denominator is `sqrt(|u|^2 |v|^2)`, which makes `cos(u, u)` exactly 1.
pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<Cosine, SimilarityError> {
    if u.dimension() != v.dimension() {
        return Err(SimilarityError::DimensionMismatch {
            left: u.dimension(),
            right: v.dimension(),
        });
    }
    let max_abs = |x: &EmbeddingVector| x.values().iter().fold(0.0f64, |m, &a| m.max(a.abs()));
    let (su, sv) = (max_abs(u), max_abs(v));
    if su == 0.0 || sv == 0.0 {
        return Ok(Cosine {
            value: 0.0,
            zero_norm: true,
        });
    }
    // Scaling by the largest component keeps the squared norms in range.
    let mut dot = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (&a, &b) in u.values().iter().zip(v.values()) {
        let (a, b) = (a / su, b / sv);
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    let denom = (uu * vv).sqrt();
    Ok(Cosine {
        value: (dot / denom).clamp(-1.0, 1.0),
        zero_norm: false,
    })
}

/// Lowercases and splits on every run of non-alphanumeric characters, then
/// drops stopwords.
pub fn tokenize(text: &str, stopwords: &[String]) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !stopwords.iter().any(|s| s == t))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Lexical,
    WordVector,
    RemoteEmbedding,
    Fixture,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Lexical => "lexical",
            BackendKind::WordVector => "wordvec",
            BackendKind::RemoteEmbedding => "remote",
            BackendKind::Fixture => "fixture",
        })
    }
}

/// Backend selection plus the parameters of the selected kind.
#[derive(Debug, Clone, PartialEq)]
pub enum BackendConfig {
    Lexical { stopwords: Vec<String> },
    WordVector { path: PathBuf },
    RemoteEmbedding(RemoteConfig),
    Fixture { path: PathBuf },
}

impl BackendConfig {
    pub fn lexical() -> Self {
        BackendConfig::Lexical { stopwords: Vec::new() }
    }

    pub fn remote(endpoint: impl Into<String>) -> Self {
        BackendConfig::RemoteEmbedding(RemoteConfig::new(endpoint))
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            BackendConfig::Lexical { .. } => BackendKind::Lexical,
            BackendConfig::WordVector { .. } => BackendKind::WordVector,
            BackendConfig::RemoteEmbedding(_) => BackendKind::RemoteEmbedding,
            BackendConfig::Fixture { .. } => BackendKind::Fixture,
        }
    }

    /// Loads whatever files the backend needs and returns it ready to use.
    pub fn build(&self) -> Result<Backend, SimilarityError> {
        Ok(match self {
            BackendConfig::Lexical { stopwords } => Backend::Lexical(LexicalBackend::new(stopwords.clone())),
            BackendConfig::WordVector { path } => {
                let vectors = load_word_vectors(path)?;
                for w in &vectors.warnings {
                    tracing::warn!("{}: {w}", path.display());
                }
                Backend::WordVector(WordVectorBackend::new(vectors))
            }
            BackendConfig::RemoteEmbedding(config) => Backend::Remote(RemoteBackend::new(config.clone())?),
            BackendConfig::Fixture { path } => Backend::Fixture(FixtureBackend::new(load_fixture_similarities(path)?)),
        })
    }
}

/// Contract shared by all similarity backends.
pub trait SimilarityBackend: Send + Sync {
    fn kind(&self) -> BackendKind;

    /// Raw similarity of two non-empty texts. Embedding backends return a
    /// cosine in `[-1, 1]`; [`text_similarity`] clamps it.
    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError>;

    /// Hint that these texts are about to be compared. Backends that pay a
    /// per-request cost can batch the work here.
    fn prefetch(&self, _texts: &[&str]) -> Result<(), SimilarityError> {
        Ok(())
    }
}

/// Any of the four concrete backends.
pub enum Backend {
    Lexical(LexicalBackend),
    WordVector(WordVectorBackend),
    Remote(RemoteBackend),
    Fixture(FixtureBackend),
}

impl Backend {
    fn inner(&self) -> &dyn SimilarityBackend {
        match self {
            Backend::Lexical(b) => b,
            Backend::WordVector(b) => b,
            Backend::Remote(b) => b,
            Backend::Fixture(b) => b,
        }
    }
}

impl SimilarityBackend for Backend {
    fn kind(&self) -> BackendKind {
        self.inner().kind()
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        self.inner().score(a, b)
    }

    fn prefetch(&self, texts: &[&str]) -> Result<(), SimilarityError> {
        self.inner().prefetch(texts)
    }
}

/// Similarity of two texts in `[0, 1]`. Negative cosines become 0.
pub fn text_similarity<B>(a: &str, b: &str, backend: &B) -> Result<f64, SimilarityError>
where
    B: SimilarityBackend + ?Sized,
{
    if a.trim().is_empty() || b.trim().is_empty() {
        return Err(SimilarityError::EmptyText);
    }
    let raw = backend.score(a, b)?;
    Ok(raw.clamp(0.0, 1.0))
}

fn cosine_or_warn(u: &EmbeddingVector, v: &EmbeddingVector, a: &str, b: &str) -> Result<f64, SimilarityError> {
    let c = cosine_similarity(u, v)?;
    if c.zero_norm {
        tracing::warn!("no in-vocabulary tokens when comparing \"{a}\" with \"{b}\"; similarity set to 0");
    }
    Ok(c.value)
}
