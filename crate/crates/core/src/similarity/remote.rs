//! HTTP client for an external sentence-embedding service.
//!
//! Wire protocol: `POST <endpoint>` with `{"texts": [...]}`; the service
//! answers `{"vectors": [[...], ...]}` with one equal-length vector per text,
//! in request order. Embeddings are cached per text for the life of the
//! backend.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{cosine_or_warn, BackendKind, EmbeddingVector, SimilarityBackend, SimilarityError};

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    /// Maximum texts per request.
    pub batch_size: usize,
    pub timeout: Duration,
    /// Extra attempts after the first failed request.
    pub retries: u32,
    /// Delay before the first retry; doubled on each further retry.
    pub retry_backoff: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            ..Self::default()
        }
    }
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            batch_size: 32,
            timeout: Duration::from_secs(30),
            retries: 3,
            retry_backoff: Duration::from_millis(100),
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    cache: Mutex<HashMap<String, Arc<EmbeddingVector>>>,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, SimilarityError> {
        if config.endpoint.is_empty() {
            return Err(SimilarityError::BackendUnavailable("no endpoint configured".into()));
        }
        if config.batch_size == 0 {
            return Err(SimilarityError::BackendUnavailable(
                "batch size must be positive".into(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| SimilarityError::BackendUnavailable(format!("http client: {e}")))?;
        Ok(Self {
            config,
            client,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    /// Embeddings for `texts`, in order. Only texts missing from the cache
    /// are sent, at most `batch_size` per request.
    pub fn embed(&self, texts: &[&str]) -> Result<Vec<Arc<EmbeddingVector>>, SimilarityError> {
        let keys: Vec<&str> = texts.iter().map(|t| t.trim()).collect();
        let missing: Vec<&str> = {
            let cache = self.cache.lock().expect("embedding cache poisoned");
            let mut seen = std::collections::HashSet::new();
            keys.iter()
                .copied()
                .filter(|k| !cache.contains_key(*k) && seen.insert(*k))
                .collect()
        };

        for chunk in missing.chunks(self.config.batch_size) {
            let vectors = self.request_with_retries(chunk)?;
            let mut cache = self.cache.lock().expect("embedding cache poisoned");
            if let Some(dim) = cache.values().next().map(|v| v.dimension()) {
                if vectors[0].dimension() != dim {
                    return Err(SimilarityError::BackendUnavailable(format!(
                        "service changed embedding dimension from {dim} to {}",
                        vectors[0].dimension()
                    )));
                }
            }
            for (text, vector) in chunk.iter().zip(vectors) {
                cache.entry((*text).to_owned()).or_insert_with(|| Arc::new(vector));
            }
        }

        let cache = self.cache.lock().expect("embedding cache poisoned");
        Ok(keys.iter().map(|k| Arc::clone(&cache[*k])).collect())
    }

    fn request_with_retries(&self, chunk: &[&str]) -> Result<Vec<EmbeddingVector>, SimilarityError> {
        let mut delay = self.config.retry_backoff;
        let mut attempt = 0;
        loop {
            match self.request(chunk) {
                Ok(vectors) => return Ok(vectors),
                Err(message) if attempt >= self.config.retries => {
                    return Err(SimilarityError::BackendUnavailable(format!(
                        "{} after {} attempt(s): {message}",
                        self.config.endpoint,
                        attempt + 1
                    )));
                }
                Err(message) => {
                    tracing::warn!("embedding request failed (attempt {}): {message}", attempt + 1);
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        }
    }

    fn request(&self, chunk: &[&str]) -> Result<Vec<EmbeddingVector>, String> {
        let response = self
            .client
            .post(&self.config.endpoint)
            .json(&EmbedRequest { texts: chunk })
            .send()
            .map_err(|e| format!("request failed: {e}"))?;
        let status = response.status();
        if !status.is_success() {
            return Err(format!("status {status}"));
        }
        let body: EmbedResponse = response.json().map_err(|e| format!("bad response body: {e}"))?;
        if body.vectors.len() != chunk.len() {
            return Err(format!("{} vectors for {} texts", body.vectors.len(), chunk.len()));
        }
        let dim = body.vectors[0].len();
        if dim == 0 || body.vectors.iter().any(|v| v.len() != dim) {
            return Err("vectors are empty or of unequal length".into());
        }
        Ok(body.vectors.into_iter().map(EmbeddingVector::new).collect())
    }
}

impl SimilarityBackend for RemoteBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::RemoteEmbedding
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        let v = self.embed(&[a, b])?;
        cosine_or_warn(&v[0], &v[1], a, b)
    }

    fn prefetch(&self, texts: &[&str]) -> Result<(), SimilarityError> {
        self.embed(texts).map(|_| ())
    }
}
