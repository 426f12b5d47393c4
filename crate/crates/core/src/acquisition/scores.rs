use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AcquisitionError;
use crate::dataset::read_jsonl;

/// Tolerance for log-probabilities slightly above zero from rounding.
const LOGPROB_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub hyp: String,
    pub logprob: f64,
}

/// Externally produced model scores for one example.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_logprob: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nbest: Vec<Hypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bt_parse_logprob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen_logprob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    rows: HashMap<String, ScoreRecord>,
}

impl ScoreTable {
    /// Validates log-probabilities (`<= 0`) and sorts every n-best list by
    /// descending probability. Later records for the same id replace
    /// earlier ones.
    pub fn from_records(records: impl IntoIterator<Item = ScoreRecord>) -> Result<Self, AcquisitionError> {
        let mut rows = HashMap::new();
        for mut r in records {
            let lps = r
                .best_logprob
                .iter()
                .chain(r.bt_parse_logprob.iter())
                .chain(r.gen_logprob.iter())
                .chain(r.nbest.iter().map(|h| &h.logprob));
            for &lp in lps {
                if lp.is_nan() || lp > LOGPROB_SLACK {
                    return Err(AcquisitionError::InvalidScore {
                        id: r.id.clone(),
                        reason: format!("log-probability {lp} is not <= 0"),
                    });
                }
            }
            r.nbest.sort_by(|a, b| b.logprob.total_cmp(&a.logprob));
            rows.insert(r.id.clone(), r);
        }
        Ok(ScoreTable { rows })
    }

    pub fn get(&self, id: &str) -> Option<&ScoreRecord> {
        self.rows.get(id)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub(crate) fn field(
        &self,
        id: &str,
        field: &'static str,
        get: impl Fn(&ScoreRecord) -> Option<f64>,
    ) -> Result<f64, AcquisitionError> {
        self.rows
            .get(id)
            .and_then(get)
            .ok_or_else(|| AcquisitionError::MissingScore { id: id.to_string(), field })
    }

    pub(crate) fn nbest(&self, id: &str) -> Result<&[Hypothesis], AcquisitionError> {
        match self.rows.get(id) {
            Some(r) if !r.nbest.is_empty() => Ok(&r.nbest),
            _ => Err(AcquisitionError::MissingScore { id: id.to_string(), field: "nbest" }),
        }
    }
}

pub fn read_score_table(path: &Path) -> Result<ScoreTable, AcquisitionError> {
    ScoreTable::from_records(read_jsonl::<ScoreRecord>(path)?)
}

/// `1 - P(y'|x)` for the parser's best output.
pub fn least_confidence(ids: &[String], table: &ScoreTable) -> Result<Vec<f64>, AcquisitionError> {
    ids.iter()
        .map(|id| Ok(1.0 - table.field(id, "best_logprob", |r| r.best_logprob)?.exp()))
        .collect()
}

/// Entropy of an n-best list after renormalizing its probabilities.
pub(crate) fn renormalized_entropy(nbest: &[Hypothesis]) -> f64 {
    let max = nbest.iter().map(|h| h.logprob).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let weights: Vec<f64> = nbest.iter().map(|h| (h.logprob - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    -weights.iter().filter(|&&w| w > 0.0).map(|w| (w / z) * (w / z).ln()).sum::<f64>()
}

pub fn nbest_entropy(ids: &[String], table: &ScoreTable) -> Result<Vec<f64>, AcquisitionError> {
    ids.iter().map(|id| Ok(renormalized_entropy(table.nbest(id)?))).collect()
}
