//! Evaluation and diversity metrics.
//!
//! Precision, recall, F1 and BLEU scores are reported on a 0-100 scale;
//! TTR and Jensen-Shannon divergence are plain ratios.

mod bleu;
mod diversity;
mod sql;

pub use bleu::{bleu_n, modified_precision, self_bleu, tokenize, SELF_BLEU_EPSILON};
pub use diversity::{js_divergence, mtld, ttr, NgramProfile, MTLD_THRESHOLD};
pub use sql::{component_f1, set_match, ClauseKind, ComponentF1, Prf, SqlClauses};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("cannot parse SQL {query:?}: {reason}")]
    SqlParse { query: String, reason: String },
    #[error("corpus needs at least 2 sentences, got {0}")]
    CorpusTooSmall(usize),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("n-gram orders differ: {left} vs {right}")]
    ProfileMismatch { left: usize, right: usize },
    #[error("invalid n-gram profile: {0}")]
    InvalidProfile(String),
    #[error("{0} predictions but {1} gold targets")]
    LengthMismatch(usize, usize),
}

/// One model output, as read from a prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub pred: String,
}

/// String equality after collapsing whitespace runs.
pub fn exact_match(pred: &str, gold: &str) -> bool {
    pred.split_whitespace().eq(gold.split_whitespace())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_cases() {
        assert!(exact_match("select a from t", "select a from t"));
        assert!(!exact_match("select a from t", "select b from t"));
        assert!(exact_match(" select  a\tfrom t ", "select a from t"));
    }
}
