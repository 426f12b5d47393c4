//! Active-learning acquisition functions and greedy batch selection.
//!
//! Scores are "higher is better" throughout, entropies are in nats, and
//! every selector breaks ties by the lowest pool index. Greedy selectors
//! re-normalize their terms over the remaining candidates before each pick.

mod abe;
mod baselines;
mod csse;
mod lfs;
mod quantile;
mod scores;

pub use abe::{
    abe_bias, abe_diversity, abe_error, abe_select, AbeCoefficients, AbeInputs, BiasVariant,
    EmpiricalTranslationModel, ErrorVariant, TranslationRow,
};
pub use baselines::{
    cluster_select, lcs_bw_select, max_compound_select, random_select, top_k, traffic_select,
};
pub use csse::csse_score;
pub use lfs::{
    lcd_score, lfs_lc_d_select, lfsd_score, prepare_lfs_lc_d, CooccurrenceModel, LfsInputs,
    LfsParams, SelectionState,
};
pub use quantile::quantile_normalize;
pub use scores::{least_confidence, nbest_entropy, read_score_table, Hypothesis, ScoreRecord, ScoreTable};

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetError;
use crate::features::FeatureError;

#[derive(Debug, thiserror::Error)]
pub enum AcquisitionError {
    #[error("no {field} score for {id:?}")]
    MissingScore { id: String, field: &'static str },
    #[error("no embedding for {0:?}")]
    MissingEmbedding(String),
    #[error("no translations recorded for logical form {0}")]
    NoTranslations(String),
    #[error("budget {k} exceeds pool size {pool}")]
    BudgetExceedsPool { k: usize, pool: usize },
    #[error("score for {id:?} is invalid: {reason}")]
    InvalidScore { id: String, reason: String },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// A selected pool index with the score it had when picked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pick {
    pub index: usize,
    pub score: f64,
}

/// One line of a selection manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub round: usize,
    pub rank: usize,
    pub id: String,
    pub score: f64,
    pub method: String,
}

pub(crate) fn check_budget(k: usize, pool: usize) -> Result<(), AcquisitionError> {
    if k > pool {
        Err(AcquisitionError::BudgetExceedsPool { k, pool })
    } else {
        Ok(())
    }
}

/// Relative gap below which two scores count as tied. Sums of quantiles
/// that agree mathematically can differ in the last bits depending on the
/// order of addition; treating those as ties keeps selections independent
/// of how the terms were combined.
pub(crate) const TIE_TOLERANCE: f64 = 1e-12;

/// True when `v` beats `b` by more than rounding noise.
pub(crate) fn beats(v: f64, b: f64) -> bool {
    if v.is_finite() && b.is_finite() {
        v - b > TIE_TOLERANCE * v.abs().max(b.abs()).max(1.0)
    } else {
        v > b
    }
}

/// Index of the highest value among `candidates`; ties, up to
/// [`TIE_TOLERANCE`], go to the earliest.
pub(crate) fn argmax(candidates: &[usize], value: impl Fn(usize) -> f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &i in candidates {
        let v = value(i);
        if best.is_none_or(|(_, b)| beats(v, b)) {
            best = Some((i, v));
        }
    }
    best
}
