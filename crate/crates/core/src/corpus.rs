//! Corpus files.
//!
//! A corpus is stored as JSON Lines, one problem per line:
//!
//! ```text
//! {"id":"PS1","label":"...","provenance":"past","source":"...","context":"...","constructs":{"action":"...","state_change":"..."}}
//! ```
//!
//! Survey answers can be imported from CSV with one column per construct.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{validate_problem, ConstructLevel, ProblemCorpus, ProblemSapphire, Provenance};

const RECORD_KEYS: [&str; 6] = ["id", "label", "provenance", "source", "context", "constructs"];

/// A problem with a corpus file, located by line (JSONL) or data row (CSV).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Row(usize),
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Location::Line(n) => write!(f, "line {n}: {}", self.message),
            Location::Row(n) => write!(f, "row {n}: {}", self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: malformed JSON: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}: {}", join_issues(.issues))]
    Invalid { path: String, issues: Vec<Issue> },
    #[error("{path}: missing CSV header row")]
    MissingHeader { path: String },
    #[error("{path}: CSV header has no 'action' column")]
    MissingActionColumn { path: String },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
}

fn join_issues(issues: &[Issue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl CorpusError {
    /// True for failures of the environment (unreadable or unwritable
    /// files) rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, CorpusError::Io { .. })
    }
}

/// A loaded corpus plus the warnings raised while reading it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCorpus {
    pub corpus: ProblemCorpus,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    #[serde(default)]
    label: String,
    provenance: Provenance,
    #[serde(default)]
    source: String,
    #[serde(default)]
    context: String,
    constructs: BTreeMap<ConstructLevel, String>,
}

impl Record {
    fn from_problem(p: &ProblemSapphire) -> Self {
        Self {
            id: p.id().to_owned(),
            label: p.label().to_owned(),
            provenance: p.provenance(),
            source: p.source().to_owned(),
            context: p.context().to_owned(),
            constructs: p.constructs().clone(),
        }
    }

    fn into_problem(self) -> ProblemSapphire {
        self.constructs.into_iter().fold(
            ProblemSapphire::new(self.id, self.provenance)
                .with_label(self.label)
                .with_source(self.source)
                .with_context(self.context),
            |p, (level, text)| p.with_construct(level, text),
        )
    }
}

fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Removes keys outside the schema and reports them.
fn unknown_keys(object: &mut serde_json::Map<String, Value>) -> Vec<String> {
    let mut unknown: Vec<String> = object
        .keys()
        .filter(|k| !RECORD_KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    for k in &unknown {
        object.remove(k);
    }
    if let Some(Value::Object(constructs)) = object.get_mut("constructs") {
        let bad: Vec<String> = constructs
            .keys()
            .filter(|k| k.parse::<ConstructLevel>().is_err())
            .cloned()
            .collect();
        for k in &bad {
            constructs.remove(k);
            unknown.push(format!("constructs.{k}"));
        }
    }
    unknown
}

/// Loads a JSONL corpus.
///
/// In strict mode every schema, validation, duplicate or role problem is
/// collected and returned as [`CorpusError::Invalid`]. In lenient mode the
/// offending records are skipped and reported as warnings. Lines that are
/// not JSON fail in both modes.
pub fn load_corpus(path: &Path, role: Provenance, strict: bool) -> Result<LoadedCorpus, CorpusError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: shown.clone(),
        source,
    })?;

    let mut corpus = ProblemCorpus::new(corpus_name(path), role);
    let mut issues: Vec<Issue> = Vec::new();
    let mut seen = HashSet::new();

    let body = text.strip_suffix('\n').unwrap_or(&text);
    let lines: Vec<&str> = if body.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    };

    for (idx, raw) in lines.iter().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let mut issue = |message: String| {
            issues.push(Issue {
                location: Location::Line(line),
                message,
            })
        };
        if raw.trim().is_empty() {
            issue("blank line".into());
            continue;
        }
        let mut value: Value = serde_json::from_str(raw).map_err(|e| CorpusError::Malformed {
            path: shown.clone(),
            line,
            message: e.to_string(),
        })?;
        let Some(object) = value.as_object_mut() else {
            return Err(CorpusError::Malformed {
                path: shown.clone(),
                line,
                message: "record is not a JSON object".into(),
            });
        };
        let unknown = unknown_keys(object);
        if !unknown.is_empty() {
            issue(format!("unknown key(s): {}", unknown.join(", ")));
            if strict {
                continue;
            }
        }
        let record: Record = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => {
                issue(format!("invalid record: {e}"));
                continue;
            }
        };
        let problem = record.into_problem();

        let violations = validate_problem(&problem);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
            issue(format!("{}: {}", problem.id(), list.join(", ")));
            continue;
        }
        if problem.provenance() != role {
            issue(format!(
                "{}: provenance '{}' does not match corpus role '{role}'",
                problem.id(),
                problem.provenance()
            ));
            continue;
        }
        if !seen.insert(problem.id().to_owned()) {
            issue(format!("duplicate id '{}'", problem.id()));
            continue;
        }
        corpus.problems.push(problem);
    }

    if strict && !issues.is_empty() {
        return Err(CorpusError::Invalid { path: shown, issues });
    }
    let mut warnings: Vec<String> = issues.iter().map(ToString::to_string).collect();
    if corpus.is_empty() {
        warnings.push("corpus is empty".into());
    }
    Ok(LoadedCorpus { corpus, warnings })
}

/// Writes `corpus` as JSONL in corpus order. The corpus must be valid.
pub fn save_corpus(corpus: &ProblemCorpus, path: &Path) -> Result<(), CorpusError> {
    let shown = path.display().to_string();
    let violations = corpus.violations();
    if !violations.is_empty() {
        return Err(CorpusError::Invalid {
            path: shown,
            issues: violations
                .into_iter()
                .enumerate()
                .map(|(i, message)| Issue {
                    location: Location::Line(i + 1),
                    message,
                })
                .collect(),
        });
    }
    let io_err = |source| CorpusError::Io {
        path: shown.clone(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    for problem in &corpus.problems {
        let line = serde_json::to_string(&Record::from_problem(problem)).expect("record serializes");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Imports survey answers as a current-problem corpus.
///
/// The header must contain an `action` column; `id`, `label`, `source` and
/// the other construct columns are optional. Empty cells become absent
/// constructs and an empty id becomes `CUR-<row>`, rows counted from 1
/// after the header.
pub fn import_survey_csv(path: &Path, context: &str, strict: bool) -> Result<LoadedCorpus, CorpusError> {
    let shown = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let csv_err = |e: csv::Error| CorpusError::Csv {
        path: shown.clone(),
        message: e.to_string(),
    };

    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(CorpusError::MissingHeader { path: shown });
    }
    let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let id_col = column("id");
    let label_col = column("label");
    let source_col = column("source");
    let level_cols: Vec<(ConstructLevel, usize)> = ConstructLevel::ALL
        .into_iter()
        .filter_map(|l| column(l.key()).map(|c| (l, c)))
        .collect();
    if !level_cols.iter().any(|(l, _)| *l == ConstructLevel::Action) {
        return Err(CorpusError::MissingActionColumn { path: shown });
    }

    let mut warnings = Vec::new();
    for h in headers.iter() {
        let h = h.trim().to_ascii_lowercase();
        if !["id", "label", "source"].contains(&h.as_str()) && h.parse::<ConstructLevel>().is_err() {
            warnings.push(format!("ignoring unknown column '{h}'"));
        }
    }

    let mut corpus = ProblemCorpus::new(corpus_name(path), Provenance::Current);
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for (idx, row) in reader.records().enumerate() {
        let row_no = idx + 1;
        let row = row.map_err(csv_err)?;
        let cell = |col: Option<usize>| col.and_then(|c| row.get(c)).map(str::trim).unwrap_or("");

        let id = match cell(id_col) {
            "" => format!("CUR-{row_no}"),
            id => id.to_owned(),
        };
        let mut problem = ProblemSapphire::new(id, Provenance::Current)
            .with_label(cell(label_col))
            .with_source(cell(source_col))
            .with_context(context);
        for &(level, col) in &level_cols {
            let text = cell(Some(col));
            if !text.is_empty() {
                problem = problem.with_construct(level, text);
            }
        }

        let violations = validate_problem(&problem);
        let message = if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
            Some(format!("{}: {}", problem.id(), list.join(", ")))
        } else if !seen.insert(problem.id().to_owned()) {
            Some(format!("duplicate id '{}'", problem.id()))
        } else {
            None
        };
        match message {
            Some(message) => issues.push(Issue {
                location: Location::Row(row_no),
                message,
            }),
            None => corpus.problems.push(problem),
        }
    }

    if strict && !issues.is_empty() {
        return Err(CorpusError::Invalid { path: shown, issues });
    }
    warnings.extend(issues.iter().map(ToString::to_string));
    if corpus.is_empty() {
        warnings.push("corpus is empty".into());
    }
    Ok(LoadedCorpus { corpus, warnings })
}
