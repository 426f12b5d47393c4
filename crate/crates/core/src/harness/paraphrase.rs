use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::metrics::{exact_match, set_match, PredictionRow, SqlClauses};

fn first_round() -> usize {
    1
}

/// A generated paraphrase paired with the target of the example it
/// paraphrases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseRow {
    pub id: String,
    #[serde(default = "first_round")]
    pub round: usize,
    pub utterance: String,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Whitespace-normalized string equality.
    Exact,
    /// SQL clause sets compared without order.
    Set,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetentionRow {
    pub round: usize,
    pub total: usize,
    pub kept: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterOutcome {
    pub kept: Vec<String>,
    pub discarded: Vec<String>,
    pub retention: Vec<RetentionRow>,
}

/// Keeps the paraphrases whose parse matches their target. A prediction
/// that is not valid SQL never set-matches; an invalid target is an error.
pub fn paraphrase_filter(
    paraphrases: &[ParaphraseRow],
    predictions: &[PredictionRow],
    mode: MatchMode,
) -> Result<FilterOutcome, HarnessError> {
    let preds: HashMap<&str, &str> = predictions.iter().map(|p| (p.id.as_str(), p.pred.as_str())).collect();
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    let mut per_round: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for row in paraphrases {
        let pred = preds.get(row.id.as_str()).ok_or_else(|| HarnessError::MissingPrediction(row.id.clone()))?;
        let ok = match mode {
            MatchMode::Exact => exact_match(pred, &row.target),
            MatchMode::Set => {
                SqlClauses::parse(&row.target)?;
                set_match(pred, &row.target).unwrap_or(false)
            }
        };
        let counts = per_round.entry(row.round).or_insert((0, 0));
        counts.0 += 1;
        if ok {
            counts.1 += 1;
            kept.push(row.id.clone());
        } else {
            discarded.push(row.id.clone());
        }
    }
    let retention = per_round
        .into_iter()
        .map(|(round, (total, k))| RetentionRow { round, total, kept: k, percent: 100.0 * k as f64 / total as f64 })
        .collect();
    Ok(FilterOutcome { kept, discarded, retention })
}

/// Percentage of paraphrases kept after each filtering round.
pub fn retention_table(rows: &[RetentionRow]) -> String {
    let mut out = String::from("| Round | Paraphrases | Kept | % kept |\n|---:|---:|---:|---:|\n");
    for r in rows {
        writeln!(out, "| {} | {} | {} | {:.2} |", r.round, r.total, r.kept, r.percent).expect("write to string");
    }
    out
}
