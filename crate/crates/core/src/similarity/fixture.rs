use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use super::{BackendKind, SimilarityBackend, SimilarityError};

/// Pinned pairwise similarities, keyed symmetrically on trimmed, lowercased
/// text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureTable {
    entries: HashMap<(String, String), f64>,
}

fn normalize(text: &str) -> String {
    text.trim().to_lowercase()
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    let (a, b) = (normalize(a), normalize(b));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl FixtureTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds a pair. Re-inserting the same value is a no-op; a different
    /// value for an existing pair is rejected.
    pub fn insert(&mut self, a: &str, b: &str, similarity: f64) -> Result<(), String> {
        if !(0.0..=1.0).contains(&similarity) {
            return Err(format!("similarity {similarity} outside [0, 1]"));
        }
        let key = pair_key(a, b);
        match self.entries.get(&key) {
            Some(&existing) if existing != similarity => Err(format!(
                "conflicting values {existing} and {similarity} for (\"{}\", \"{}\")",
                key.0, key.1
            )),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(key, similarity);
                Ok(())
            }
        }
    }

    /// Pinned value for the pair. Texts that normalize to the same string
    /// are identical and score 1 unless a value is pinned for them.
    pub fn lookup(&self, a: &str, b: &str) -> Option<f64> {
        let key = pair_key(a, b);
        match self.entries.get(&key) {
            Some(&v) => Some(v),
            None if key.0 == key.1 => Some(1.0),
            None => None,
        }
    }
}

pub fn load_fixture_similarities(path: &Path) -> Result<FixtureTable, SimilarityError> {
    let shown = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| SimilarityError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_fixture_similarities(std::io::BufReader::new(file), &shown)
}

/// Reads tab-separated `textA<TAB>textB<TAB>similarity` records. Blank
/// lines and lines starting with `#` are skipped.
pub fn parse_fixture_similarities<R: BufRead>(reader: R, origin: &str) -> Result<FixtureTable, SimilarityError> {
    let mut table = FixtureTable::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| SimilarityError::Parse {
            path: origin.to_owned(),
            line: line_no,
            message,
        };
        let line = line.map_err(|source| SimilarityError::Io {
            path: origin.to_owned(),
            source,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, value] = fields[..] else {
            return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        if a.trim().is_empty() || b.trim().is_empty() {
            return Err(err("empty text field".into()));
        }
        let similarity: f64 = value
            .trim()
            .parse()
            .map_err(|e| err(format!("bad similarity '{value}': {e}")))?;
        table.insert(a, b, similarity).map_err(err)?;
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct FixtureBackend {
    table: FixtureTable,
}

impl FixtureBackend {
    pub fn new(table: FixtureTable) -> Self {
        Self { table }
    }
}

impl SimilarityBackend for FixtureBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Fixture
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        self.table.lookup(a, b).ok_or_else(|| SimilarityError::MissingFixture {
            a: a.to_owned(),
            b: b.to_owned(),
        })
    }
}
