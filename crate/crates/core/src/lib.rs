//! Novelty assessment of design problems.
//!
//! Problems are described at the seven SAPPhIRE abstraction levels. Each
//! current problem is compared with a reference corpus of past problems:
//! pairs whose Action texts match are scored level by level, similarity is
//! turned into novelty, and current problems are ranked by their smallest
//! novelty against the past corpus.

pub mod assessment;
pub mod cli;
pub mod corpus;
pub mod model;
pub mod report;
pub mod similarity;

pub use assessment::{
    action_match, aggregate_novelty, assess_pair, classify_novelty, construct_novelty, o_score, rank_current_problems,
    ActionMatch, AssessmentError, NoveltyBand, NoveltyReport, OScoreInput, PairAssessment, RankedProblem,
    UnmatchedProblem, DEFAULT_GATE_THRESHOLD,
};
pub use model::{construct_text, validate_problem, ConstructLevel, ProblemCorpus, ProblemSapphire, Provenance};
pub use similarity::{text_similarity, Backend, BackendConfig, BackendKind, SimilarityBackend, SimilarityError};
