use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use super::{cosine_or_warn, tokenize, BackendKind, EmbeddingVector, SimilarityBackend, SimilarityError};

/// Word-vector table read from the plain-text vector format.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    dimension: usize,
    table: HashMap<String, EmbeddingVector>,
    /// Non-fatal findings from loading, such as duplicate words.
    pub warnings: Vec<String>,
}

impl WordVectors {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&EmbeddingVector> {
        self.table.get(word)
    }
}

pub fn load_word_vectors(path: &Path) -> Result<WordVectors, SimilarityError> {
    let shown = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| SimilarityError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_word_vectors(std::io::BufReader::new(file), &shown)
}

/// Parses `[<count> <dim>]` followed by `word f1 .. fdim` lines. `origin`
/// names the input in error messages.
pub fn parse_word_vectors<R: BufRead>(reader: R, origin: &str) -> Result<WordVectors, SimilarityError> {
    let parse_err = |line: usize, message: String| SimilarityError::Parse {
        path: origin.to_owned(),
        line,
        message,
    };

    let mut dimension: Option<usize> = None;
    let mut declared_count: Option<usize> = None;
    let mut table = HashMap::new();
    let mut warnings = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| SimilarityError::Io {
            path: origin.to_owned(),
            source,
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if line_no == 1 && fields.len() == 2 {
            if let (Ok(count), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                if dim == 0 {
                    return Err(parse_err(line_no, "header declares dimension 0".into()));
                }
                declared_count = Some(count);
                dimension = Some(dim);
                continue;
            }
        }

        let word = fields[0];
        let values = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(line_no, format!("bad number for '{word}': {e}")))?;
        if values.iter().any(|x| !x.is_finite()) {
            return Err(parse_err(line_no, format!("non-finite component for '{word}'")));
        }
        match dimension {
            None if values.is_empty() => {
                return Err(parse_err(line_no, format!("'{word}' has no vector components")));
            }
            None => dimension = Some(values.len()),
            Some(dim) if dim != values.len() => {
                return Err(parse_err(
                    line_no,
                    format!("'{word}' has {} components, expected {dim}", values.len()),
                ));
            }
            Some(_) => {}
        }
        if table.contains_key(word) {
            warnings.push(format!("line {line_no}: duplicate word '{word}' ignored"));
            continue;
        }
        table.insert(word.to_owned(), EmbeddingVector::new(values));
    }

    let Some(dimension) = dimension.filter(|_| !table.is_empty()) else {
        return Err(SimilarityError::InvalidFile {
            path: origin.to_owned(),
            message: "no word vectors".into(),
        });
    };
    if let Some(count) = declared_count {
        let found = table.len() + warnings.len();
        if count != found {
            warnings.push(format!("header declares {count} words, found {found}"));
        }
    }
    Ok(WordVectors {
        dimension,
        table,
        warnings,
    })
}

/// Mean-pooled sentence vector. `oov` is set when no token was found and
/// the vector is the zero sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub vector: EmbeddingVector,
    pub oov: bool,
}

pub fn embed_wordvector(tokens: &[String], vectors: &WordVectors) -> Pooled {
    let mut sum = vec![0.0; vectors.dimension];
    let mut hits = 0usize;
    for token in tokens {
        if let Some(v) = vectors.get(token) {
            for (s, x) in sum.iter_mut().zip(v.values()) {
                *s += x;
            }
            hits += 1;
        }
    }
    if hits == 0 {
        return Pooled {
            vector: EmbeddingVector::zeros(vectors.dimension),
            oov: true,
        };
    }
    let n = hits as f64;
    Pooled {
        vector: EmbeddingVector::new(sum.into_iter().map(|s| s / n).collect()),
        oov: false,
    }
}

#[derive(Debug, Clone)]
pub struct WordVectorBackend {
    vectors: WordVectors,
}

impl WordVectorBackend {
    pub fn new(vectors: WordVectors) -> Self {
        Self { vectors }
    }
}

impl SimilarityBackend for WordVectorBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::WordVector
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        let pa = embed_wordvector(&tokenize(a, &[]), &self.vectors);
        let pb = embed_wordvector(&tokenize(b, &[]), &self.vectors);
        cosine_or_warn(&pa.vector, &pb.vector, a, b)
    }
}
