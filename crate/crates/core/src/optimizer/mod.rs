//! Search over degree distributions for the largest empirical success
//! threshold under fixed mean degrees.

mod enumerate;
mod search;

pub use enumerate::{bimodal_weight, enumerate_bimodal, enumerate_sparse, for_each_sparse};
pub use search::{
    optimize, write_candidates_csv, Candidate, Evaluation, OptimizeResult, OptimizerConfig,
    SearchSpace, Side, SideConstraint, StageConfig, SIZE_SEARCH_RADIUS,
};

use thiserror::Error;

use crate::analysis::AnalysisError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("search space has no candidates")]
    EmptySpace,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
