//! Novelty scoring: action gate, per-construct novelty, aggregation,
//! banding and ranking of current problems against a past corpus.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{ConstructLevel, ProblemCorpus, ProblemSapphire};
use crate::similarity::{text_similarity, BackendKind, SimilarityBackend, SimilarityError};

pub const DEFAULT_GATE_THRESHOLD: f64 = 0.7;

#[derive(Debug, thiserror::Error)]
pub enum AssessmentError {
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("{what} {value} outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("cannot average an empty set of construct levels")]
    EmptyAggregate,
    #[error("the action level is never part of the average")]
    ActionIncluded,
    #[error("no novelty score for level {0}")]
    MissingScore(ConstructLevel),
    #[error("invalid problem {id}: {details}")]
    InvalidProblem { id: String, details: String },
    #[error("invalid corpus '{name}': {details}")]
    InvalidCorpus { name: String, details: String },
    #[error("past corpus is empty")]
    EmptyPastCorpus,
    #[error("invalid O-score input: n = {n}, m = {m} (need 0 <= n <= m and m >= 1)")]
    InvalidOScore { n: u64, m: u64 },
}

fn check_unit(what: &'static str, value: f64) -> Result<f64, AssessmentError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(AssessmentError::OutOfRange { what, value })
    }
}

/// Qualitative novelty band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoveltyBand {
    Low,
    Medium,
    High,
}

impl NoveltyBand {
    pub fn label(self) -> &'static str {
        match self {
            NoveltyBand::Low => "Low Novelty",
            NoveltyBand::Medium => "Medium Novelty",
            NoveltyBand::High => "High Novelty",
        }
    }
}

impl fmt::Display for NoveltyBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoveltyBand::Low => "low",
            NoveltyBand::Medium => "medium",
            NoveltyBand::High => "high",
        })
    }
}

/// Rounds half away from zero at `decimals` places. The small nudge keeps
/// values such as 0.685 (stored as 0.68499999...) rounding up.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (value * scale + value.signum() * 1e-9).round() / scale
}

/// Outcome of comparing two Action texts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionMatch {
    pub matched: bool,
    pub similarity: f64,
}

fn action_text(problem: &ProblemSapphire) -> Result<&str, AssessmentError> {
    problem
        .construct_text(ConstructLevel::Action)
        .ok_or_else(|| AssessmentError::InvalidProblem {
            id: problem.id().to_owned(),
            details: "missing action text".into(),
        })
}

pub fn action_match<B>(
    past: &ProblemSapphire,
    current: &ProblemSapphire,
    backend: &B,
    threshold: f64,
) -> Result<ActionMatch, AssessmentError>
where
    B: SimilarityBackend + ?Sized,
{
    check_unit("threshold", threshold)?;
    let similarity = text_similarity(action_text(past)?, action_text(current)?, backend)?;
    Ok(ActionMatch {
        matched: similarity >= threshold,
        similarity,
    })
}

pub fn construct_novelty(similarity: f64) -> Result<f64, AssessmentError> {
    Ok(1.0 - check_unit("similarity", similarity)?)
}

/// Arithmetic mean of `scores` over `included`. Action may not be included.
pub fn aggregate_novelty(
    scores: &BTreeMap<ConstructLevel, f64>,
    included: &[ConstructLevel],
) -> Result<f64, AssessmentError> {
    if included.is_empty() {
        return Err(AssessmentError::EmptyAggregate);
    }
    let mut sum = 0.0;
    for &level in included {
        if level == ConstructLevel::Action {
            return Err(AssessmentError::ActionIncluded);
        }
        sum += scores.get(&level).ok_or(AssessmentError::MissingScore(level))?;
    }
    Ok(sum / included.len() as f64)
}

/// Band of `score` after rounding it to two decimals:
/// `[0, 0.3)` low, `[0.3, 0.7)` medium, `[0.7, 1]` high.
pub fn classify_novelty(score: f64) -> Result<NoveltyBand, AssessmentError> {
    check_unit("novelty score", score)?;
    let hundredths = (round_half_up(score, 2) * 100.0).round() as u32;
    Ok(match hundredths {
        0..=29 => NoveltyBand::Low,
        30..=69 => NoveltyBand::Medium,
        _ => NoveltyBand::High,
    })
}

/// Per-construct comparison of one past problem with one current problem
/// that passed the action gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairAssessment {
    pub past_id: String,
    pub current_id: String,
    pub construct_similarity: BTreeMap<ConstructLevel, f64>,
    pub construct_novelty: BTreeMap<ConstructLevel, f64>,
    /// Levels that enter the average, in canonical order.
    pub included_levels: Vec<ConstructLevel>,
    /// `None` when the two problems share no non-Action level.
    pub average_novelty: Option<f64>,
    pub band: Option<NoveltyBand>,
    /// Fewer than six levels were averaged.
    pub reduced: bool,
}

impl PairAssessment {
    pub fn action_similarity(&self) -> f64 {
        self.construct_similarity[&ConstructLevel::Action]
    }
}

/// Compares two problems level by level, or returns `None` when their
/// Action texts do not match.
pub fn assess_pair<B>(
    past: &ProblemSapphire,
    current: &ProblemSapphire,
    backend: &B,
    threshold: f64,
) -> Result<Option<PairAssessment>, AssessmentError>
where
    B: SimilarityBackend + ?Sized,
{
    let gate = action_match(past, current, backend, threshold)?;
    if !gate.matched {
        return Ok(None);
    }

    let mut similarity = BTreeMap::new();
    let mut novelty = BTreeMap::new();
    similarity.insert(ConstructLevel::Action, gate.similarity);
    novelty.insert(ConstructLevel::Action, construct_novelty(gate.similarity)?);

    let mut included = Vec::new();
    for level in ConstructLevel::COMPARED {
        let (Some(a), Some(b)) = (past.construct_text(level), current.construct_text(level)) else {
            continue;
        };
        let s = text_similarity(a, b, backend)?;
        similarity.insert(level, s);
        novelty.insert(level, construct_novelty(s)?);
        included.push(level);
    }

    let (average_novelty, band) = if included.is_empty() {
        (None, None)
    } else {
        let avg = aggregate_novelty(&novelty, &included)?;
        (Some(avg), Some(classify_novelty(avg)?))
    };
    let reduced = included.len() < ConstructLevel::COMPARED.len();

    Ok(Some(PairAssessment {
        past_id: past.id().to_owned(),
        current_id: current.id().to_owned(),
        construct_similarity: similarity,
        construct_novelty: novelty,
        included_levels: included,
        average_novelty,
        band,
        reduced,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedProblem {
    /// 1 is the most novel.
    pub rank: usize,
    pub current_id: String,
    /// Smallest average novelty over all gated past problems.
    pub min_novelty: f64,
    pub band: NoveltyBand,
    /// Past problem that attains `min_novelty`.
    pub closest_past_id: String,
    pub assessments: Vec<PairAssessment>,
}

/// A current problem with no scored past comparison: either no past Action
/// matched, or the matches shared no comparable constructs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnmatchedProblem {
    pub current_id: String,
    pub assessments: Vec<PairAssessment>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoveltyReport {
    pub backend: BackendKind,
    pub threshold: f64,
    pub ranked: Vec<RankedProblem>,
    pub unmatched: Vec<UnmatchedProblem>,
}

impl NoveltyReport {
    /// All gated pair assessments, grouped by past problem in past-corpus
    /// order, each group ordered by current-corpus position.
    pub fn pairs_by_past<'a>(
        &'a self,
        past: &ProblemCorpus,
        current: &ProblemCorpus,
    ) -> Vec<(&'a str, Vec<&'a PairAssessment>)> {
        let position = |id: &str| current.problems.iter().position(|p| p.id() == id);
        let all: Vec<&PairAssessment> = self
            .ranked
            .iter()
            .flat_map(|r| &r.assessments)
            .chain(self.unmatched.iter().flat_map(|u| &u.assessments))
            .collect();
        past.problems
            .iter()
            .filter_map(|p| {
                let mut pairs: Vec<&PairAssessment> = all.iter().copied().filter(|a| a.past_id == p.id()).collect();
                pairs.sort_by_key(|a| (position(&a.current_id), a.current_id.clone()));
                let first: &'a str = pairs.first()?.past_id.as_str();
                Some((first, pairs))
            })
            .collect()
    }
}

fn ensure_valid(corpus: &ProblemCorpus) -> Result<(), AssessmentError> {
    let violations = corpus.violations();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(AssessmentError::InvalidCorpus {
            name: corpus.name.clone(),
            details: violations.join("; "),
        })
    }
}

/// Assesses every current problem against every past problem and orders
/// the current problems by their minimum novelty, most novel first.
///
/// Pairs are evaluated in parallel; the report is assembled afterwards in
/// corpus order, so it does not depend on scheduling.
pub fn rank_current_problems<B>(
    past: &ProblemCorpus,
    current: &ProblemCorpus,
    backend: &B,
    threshold: f64,
) -> Result<NoveltyReport, AssessmentError>
where
    B: SimilarityBackend + ?Sized,
{
    check_unit("threshold", threshold)?;
    ensure_valid(past)?;
    ensure_valid(current)?;
    if past.is_empty() {
        return Err(AssessmentError::EmptyPastCorpus);
    }

    let texts: Vec<&str> = past
        .problems
        .iter()
        .chain(&current.problems)
        .flat_map(|p| ConstructLevel::ALL.into_iter().filter_map(|l| p.construct_text(l)))
        .collect();
    backend.prefetch(&texts)?;

    let jobs: Vec<(&ProblemSapphire, &ProblemSapphire)> = current
        .problems
        .iter()
        .flat_map(|c| past.problems.iter().map(move |p| (p, c)))
        .collect();
    let results: Vec<Result<Option<PairAssessment>, AssessmentError>> = jobs
        .par_iter()
        .map(|(p, c)| assess_pair(p, c, backend, threshold))
        .collect();

    let mut per_current: Vec<Vec<PairAssessment>> = vec![Vec::new(); current.len()];
    for (i, result) in results.into_iter().enumerate() {
        if let Some(assessment) = result? {
            per_current[i / past.len()].push(assessment);
        }
    }

    let mut ranked = Vec::new();
    let mut unmatched = Vec::new();
    for (problem, assessments) in current.problems.iter().zip(per_current) {
        let closest = assessments
            .iter()
            .filter_map(|a| a.average_novelty.map(|avg| (avg, a)))
            .min_by(|x, y| x.0.total_cmp(&y.0));
        match closest {
            Some((min, a)) => {
                let closest_past_id = a.past_id.clone();
                ranked.push(RankedProblem {
                    rank: 0,
                    current_id: problem.id().to_owned(),
                    min_novelty: min,
                    band: classify_novelty(min)?,
                    closest_past_id,
                    assessments,
                });
            }
            None => unmatched.push(UnmatchedProblem {
                current_id: problem.id().to_owned(),
                assessments,
            }),
        }
    }

    ranked.sort_by(|a, b| {
        b.min_novelty
            .total_cmp(&a.min_novelty)
            .then_with(|| a.current_id.cmp(&b.current_id))
    });
    for (i, r) in ranked.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    unmatched.sort_by(|a, b| a.current_id.cmp(&b.current_id));

    Ok(NoveltyReport {
        backend: backend.kind(),
        threshold,
        ranked,
        unmatched,
    })
}

/// Counts behind the frequency-based originality score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OScoreInput {
    /// Ideas in the session similar to the one being scored.
    pub similar: u64,
    /// All ideas in the session.
    pub total: u64,
}

impl OScoreInput {
    pub fn new(similar: u64, total: u64) -> Result<Self, AssessmentError> {
        if total == 0 || similar > total {
            return Err(AssessmentError::InvalidOScore { n: similar, m: total });
        }
        Ok(Self { similar, total })
    }
}

/// Originality `1 - n/m`.
pub fn o_score(input: OScoreInput) -> f64 {
    1.0 - input.similar as f64 / input.total as f64
}
