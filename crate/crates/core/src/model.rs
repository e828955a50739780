//! Problem-SAPPhIRE data model.
//!
//! A design problem is described by up to seven construct texts, one per
//! SAPPhIRE abstraction level. Only the Action level is mandatory; the
//! remaining levels may be absent when the source (a survey answer, a patent
//! abstract) does not specify them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the seven SAPPhIRE abstraction levels.
///
/// The derived `Ord` follows declaration order, which is the canonical
/// display order used by every report and file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructLevel {
    Action,
    StateChange,
    Phenomena,
    Effect,
    Input,
    Organ,
    Parts,
}

impl ConstructLevel {
    pub const ALL: [ConstructLevel; 7] = [
        ConstructLevel::Action,
        ConstructLevel::StateChange,
        ConstructLevel::Phenomena,
        ConstructLevel::Effect,
        ConstructLevel::Input,
        ConstructLevel::Organ,
        ConstructLevel::Parts,
    ];

    /// The six levels compared after the action gate.
    pub const COMPARED: [ConstructLevel; 6] = [
        ConstructLevel::StateChange,
        ConstructLevel::Phenomena,
        ConstructLevel::Effect,
        ConstructLevel::Input,
        ConstructLevel::Organ,
        ConstructLevel::Parts,
    ];

    /// Key used in corpus files and CSV headers.
    pub fn key(self) -> &'static str {
        match self {
            ConstructLevel::Action => "action",
            ConstructLevel::StateChange => "state_change",
            ConstructLevel::Phenomena => "phenomena",
            ConstructLevel::Effect => "effect",
            ConstructLevel::Input => "input",
            ConstructLevel::Organ => "organ",
            ConstructLevel::Parts => "parts",
        }
    }

    /// Row label used in the tabular report.
    pub fn display_name(self) -> &'static str {
        match self {
            ConstructLevel::Action => "Action",
            ConstructLevel::StateChange => "State Change",
            ConstructLevel::Phenomena => "Phenomena",
            ConstructLevel::Effect => "Effect",
            ConstructLevel::Input => "Input",
            ConstructLevel::Organ => "oRgan",
            ConstructLevel::Parts => "Parts",
        }
    }
}

impl fmt::Display for ConstructLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown construct level '{0}'")]
pub struct UnknownLevel(pub String);

impl FromStr for ConstructLevel {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConstructLevel::ALL
            .into_iter()
            .find(|level| level.key() == s)
            .ok_or_else(|| UnknownLevel(s.to_owned()))
    }
}

/// Whether a problem comes from the historical reference set or from
/// stakeholders of the current design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Past,
    Current,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Past => "past",
            Provenance::Current => "current",
        })
    }
}

/// A design problem expressed at the SAPPhIRE levels.
///
/// Construction never fails; use [`validate_problem`] to check the record.
/// Texts are kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSapphire {
    id: String,
    label: String,
    provenance: Provenance,
    source: String,
    context: String,
    constructs: BTreeMap<ConstructLevel, String>,
}

impl ProblemSapphire {
    pub fn new(id: impl Into<String>, provenance: Provenance) -> Self {
        Self {
            id: id.into(),
            label: String::new(),
            provenance,
            source: String::new(),
            context: String::new(),
            constructs: BTreeMap::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }

    pub fn with_construct(mut self, level: ConstructLevel, text: impl Into<String>) -> Self {
        self.constructs.insert(level, text.into());
        self
    }

    pub fn without_construct(mut self, level: ConstructLevel) -> Self {
        self.constructs.remove(&level);
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn context(&self) -> &str {
        &self.context
    }

    /// Raw construct map, including any texts that fail validation.
    pub fn constructs(&self) -> &BTreeMap<ConstructLevel, String> {
        &self.constructs
    }

    /// Construct text at `level`, or `None` if the level is absent or blank.
    pub fn construct_text(&self, level: ConstructLevel) -> Option<&str> {
        construct_text(self, level)
    }

    /// Levels carrying a non-blank text, in canonical order.
    pub fn present_levels(&self) -> impl Iterator<Item = ConstructLevel> + '_ {
        ConstructLevel::ALL
            .into_iter()
            .filter(|&level| self.construct_text(level).is_some())
    }
}

/// Returns the construct text at `level`. Blank texts are reported as absent.
pub fn construct_text(problem: &ProblemSapphire, level: ConstructLevel) -> Option<&str> {
    problem
        .constructs
        .get(&level)
        .map(String::as_str)
        .filter(|text| !text.trim().is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyId,
    IdContainsWhitespace,
    MissingAction,
    BlankConstruct,
}

/// One broken invariant of a [`ProblemSapphire`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub level: Option<ConstructLevel>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::EmptyId => "id is empty",
            ViolationKind::IdContainsWhitespace => "id contains whitespace",
            ViolationKind::MissingAction => "action text is missing",
            ViolationKind::BlankConstruct => "construct text is blank",
        };
        match self.level {
            Some(level) => write!(f, "{}.{}: {what}", self.field, level),
            None => write!(f, "{}: {what}", self.field),
        }
    }
}

/// Checks every record invariant and returns all violations found.
/// An empty list means the problem is valid.
pub fn validate_problem(problem: &ProblemSapphire) -> Vec<Violation> {
    let mut violations = Vec::new();

    if problem.id.is_empty() {
        violations.push(Violation {
            field: "id",
            level: None,
            kind: ViolationKind::EmptyId,
        });
    } else if problem.id.chars().any(char::is_whitespace) {
        violations.push(Violation {
            field: "id",
            level: None,
            kind: ViolationKind::IdContainsWhitespace,
        });
    }

    if !problem.constructs.contains_key(&ConstructLevel::Action) {
        violations.push(Violation {
            field: "constructs",
            level: Some(ConstructLevel::Action),
            kind: ViolationKind::MissingAction,
        });
    }

    for (&level, text) in &problem.constructs {
        if text.trim().is_empty() {
            violations.push(Violation {
                field: "constructs",
                level: Some(level),
                kind: ViolationKind::BlankConstruct,
            });
        }
    }

    violations
}

/// A named collection of problems that all share one provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemCorpus {
    pub name: String,
    pub role: Provenance,
    pub problems: Vec<ProblemSapphire>,
}

impl ProblemCorpus {
    pub fn new(name: impl Into<String>, role: Provenance) -> Self {
        Self {
            name: name.into(),
            role,
            problems: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ProblemSapphire> {
        self.problems.iter().find(|p| p.id() == id)
    }

    /// Corpus-level problems: per-record violations, duplicate ids and
    /// provenance mismatches, each prefixed with the offending id.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for problem in &self.problems {
            for v in validate_problem(problem) {
                out.push(format!("{}: {v}", problem.id()));
            }
            if !seen.insert(problem.id()) {
                out.push(format!("{}: duplicate id", problem.id()));
            }
            if problem.provenance() != self.role {
                out.push(format!(
                    "{}: provenance '{}' does not match corpus role '{}'",
                    problem.id(),
                    problem.provenance(),
                    self.role
                ));
            }
        }
        out
    }
}
