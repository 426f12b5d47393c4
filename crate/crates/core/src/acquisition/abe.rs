use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::scores::renormalized_entropy;
use super::{argmax, check_budget, quantile_normalize, AcquisitionError, Pick, ScoreTable};
use crate::features::kernel_density_all;

/// A target-language utterance in the current training data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationRow {
    pub id: String,
    pub text: String,
}

/// Count-based translation distribution per logical form: `P(x_t | y)` is
/// the relative frequency of each translation string among the training
/// rows whose LF key is `y`.
#[derive(Debug, Clone, Default)]
pub struct EmpiricalTranslationModel {
    per_lf: BTreeMap<String, Vec<TranslationRow>>,
}

impl EmpiricalTranslationModel {
    pub fn new() -> Self {
        EmpiricalTranslationModel::default()
    }

    pub fn add(&mut self, lf_key: &str, id: &str, text: &str) {
        self.per_lf
            .entry(lf_key.to_string())
            .or_default()
            .push(TranslationRow { id: id.to_string(), text: text.to_string() });
    }

    pub fn translations(&self, lf_key: &str) -> &[TranslationRow] {
        self.per_lf.get(lf_key).map_or(&[], Vec::as_slice)
    }

    fn rows(&self, lf_key: &str) -> Result<&[TranslationRow], AcquisitionError> {
        match self.per_lf.get(lf_key) {
            Some(rows) if !rows.is_empty() => Ok(rows),
            _ => Err(AcquisitionError::NoTranslations(lf_key.to_string())),
        }
    }

    fn frequencies(&self, lf_key: &str) -> Result<BTreeMap<&str, usize>, AcquisitionError> {
        let mut freq = BTreeMap::new();
        for r in self.rows(lf_key)? {
            *freq.entry(r.text.as_str()).or_insert(0) += 1;
        }
        Ok(freq)
    }

    /// Entropy of the translation distribution of an LF.
    pub fn entropy(&self, lf_key: &str) -> Result<f64, AcquisitionError> {
        let freq = self.frequencies(lf_key)?;
        let n: usize = freq.values().sum();
        Ok(-freq.values().map(|&c| c as f64 / n as f64).map(|p| p * p.ln()).sum::<f64>())
    }

    /// The most frequent translation; ties go to the earliest row.
    pub fn most_frequent(&self, lf_key: &str) -> Result<&TranslationRow, AcquisitionError> {
        let freq = self.frequencies(lf_key)?;
        let rows = self.rows(lf_key)?;
        let mut best = &rows[0];
        for r in rows {
            if freq[r.text.as_str()] > freq[best.text.as_str()] {
                best = r;
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasVariant {
    /// Negated entropy of the count-based distribution of the example's LF.
    Factorized,
    /// Negated renormalized entropy of the translation n-best list.
    #[serde(rename = "nbest")]
    NBest,
    /// Log-probability of the top translation hypothesis.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorVariant {
    /// Expected parser NLL over the back-translations of all translations
    /// sharing the example's LF.
    #[serde(rename = "nbest")]
    NBest,
    /// Parser NLL on the back-translation of the most frequent translation.
    Max,
}

/// Weights of the bias, error, density and diversity terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbeCoefficients {
    pub bias: f64,
    pub error: f64,
    pub density: f64,
    pub diversity: f64,
}

impl Default for AbeCoefficients {
    fn default() -> Self {
        AbeCoefficients { bias: 1.0, error: 1.0, density: 1.0, diversity: 1.0 }
    }
}

/// Pool-aligned inputs of [`abe_select`].
#[derive(Debug, Clone)]
pub struct AbeInputs<'a> {
    pub ids: &'a [String],
    pub lf_keys: &'a [String],
    pub model: &'a EmpiricalTranslationModel,
    /// Translation n-best lists of pool ids and back-translation parse
    /// scores of training translation rows.
    pub scores: &'a ScoreTable,
    pub embeddings: &'a [Vec<f64>],
    pub clusters: &'a [usize],
    pub density_k: usize,
    pub bandwidth: f64,
}

/// Higher means more biased translations.
pub fn abe_bias(
    ids: &[String],
    lf_keys: &[String],
    model: &EmpiricalTranslationModel,
    scores: &ScoreTable,
    variant: BiasVariant,
) -> Result<Vec<f64>, AcquisitionError> {
    ids.iter()
        .zip(lf_keys)
        .map(|(id, key)| match variant {
            BiasVariant::Factorized => Ok(-model.entropy(key)?),
            BiasVariant::NBest => Ok(-renormalized_entropy(scores.nbest(id)?)),
            BiasVariant::Max => Ok(scores.nbest(id)?[0].logprob),
        })
        .collect()
}

/// Higher means a larger expected translation error.
pub fn abe_error(
    lf_keys: &[String],
    model: &EmpiricalTranslationModel,
    scores: &ScoreTable,
    variant: ErrorVariant,
) -> Result<Vec<f64>, AcquisitionError> {
    let nll = |row: &TranslationRow| -> Result<f64, AcquisitionError> {
        Ok(-scores.field(&row.id, "bt_parse_logprob", |r| r.bt_parse_logprob)?)
    };
    lf_keys
        .iter()
        .map(|key| match variant {
            ErrorVariant::NBest => {
                let rows = model.rows(key)?;
                let mut total = 0.0;
                for r in rows {
                    total += nll(r)?;
                }
                Ok(total / rows.len() as f64)
            }
            ErrorVariant::Max => nll(model.most_frequent(key)?),
        })
        .collect()
}

/// 0 for candidates in clusters without a selection, `-inf` otherwise.
pub fn abe_diversity(clusters: &[usize], used: &BTreeSet<usize>) -> Vec<f64> {
    clusters.iter().map(|c| if used.contains(c) { f64::NEG_INFINITY } else { 0.0 }).collect()
}

/// Greedy selection by the weighted sum of the quantile-normalized bias,
/// error and density terms, gated by semantic diversity when its
/// coefficient is positive. `used_clusters` is updated with every pick. If
/// every remaining candidate is gated, the gate is lifted for the rest of
/// the round.
pub fn abe_select(
    inputs: &AbeInputs<'_>,
    bias: BiasVariant,
    error: ErrorVariant,
    coefficients: AbeCoefficients,
    used_clusters: &mut BTreeSet<usize>,
    k: usize,
) -> Result<Vec<Pick>, AcquisitionError> {
    let n = inputs.ids.len();
    check_budget(k, n)?;
    let zero = vec![0.0; n];
    let bias_raw = if coefficients.bias != 0.0 {
        abe_bias(inputs.ids, inputs.lf_keys, inputs.model, inputs.scores, bias)?
    } else {
        zero.clone()
    };
    let error_raw = if coefficients.error != 0.0 {
        abe_error(inputs.lf_keys, inputs.model, inputs.scores, error)?
    } else {
        zero.clone()
    };
    let density_raw = if coefficients.density != 0.0 {
        kernel_density_all(inputs.embeddings, inputs.density_k, inputs.bandwidth)?
    } else {
        zero
    };
    let gate = coefficients.diversity > 0.0;

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let over = |raw: &[f64]| quantile_normalize(&remaining.iter().map(|&i| raw[i]).collect::<Vec<_>>());
        let (qb, qe, qd) = (over(&bias_raw), over(&error_raw), over(&density_raw));
        let clusters: Vec<usize> = remaining.iter().map(|&i| inputs.clusters[i]).collect();
        let mut diversity = abe_diversity(&clusters, used_clusters);
        if !gate || diversity.iter().all(|d| *d == f64::NEG_INFINITY) {
            diversity.iter_mut().for_each(|d| *d = 0.0);
        }
        let positions: Vec<usize> = (0..remaining.len()).collect();
        let (pos, score) = argmax(&positions, |p| {
            coefficients.bias * qb[p] + coefficients.error * qe[p] + coefficients.density * qd[p] + diversity[p]
        })
        .expect("k <= pool size");
        let index = remaining.remove(pos);
        used_clusters.insert(inputs.clusters[index]);
        picks.push(Pick { index, score });
    }
    Ok(picks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::{Hypothesis, ScoreRecord};

    fn model(rows: &[(&str, &str, &str)]) -> EmpiricalTranslationModel {
        let mut m = EmpiricalTranslationModel::new();
        for (key, id, text) in rows {
            m.add(key, id, text);
        }
        m
    }

    fn bt_scores(rows: &[(&str, f64)]) -> ScoreTable {
        ScoreTable::from_records(rows.iter().map(|(id, lp)| ScoreRecord {
            id: id.to_string(),
            bt_parse_logprob: Some(*lp),
            ..Default::default()
        }))
        .unwrap()
    }

    fn keys(k: &[&str]) -> Vec<String> {
        k.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn factorized_bias() {
        let m = model(&[
            ("y1", "t1", "a"),
            ("y2", "t2", "a"),
            ("y2", "t3", "b"),
            ("y2", "t4", "c"),
            ("y2", "t5", "d"),
        ]);
        let ids = keys(&["s1", "s2", "s3"]);
        let b = abe_bias(&ids, &keys(&["y1", "y2", "y2"]), &m, &ScoreTable::default(), BiasVariant::Factorized).unwrap();
        assert_eq!(b[0], 0.0);
        assert!((b[1] + 4f64.ln()).abs() < 1e-15);
        assert_eq!(b[1], b[2]);
        assert!(matches!(
            abe_bias(&ids[..1], &keys(&["zz"]), &m, &ScoreTable::default(), BiasVariant::Factorized),
            Err(AcquisitionError::NoTranslations(_))
        ));
    }

    #[test]
    fn nbest_and_max_bias() {
        let t = ScoreTable::from_records([ScoreRecord {
            id: "s".into(),
            nbest: vec![
                Hypothesis { hyp: "a".into(), logprob: 0.5f64.ln() },
                Hypothesis { hyp: "b".into(), logprob: 0.5f64.ln() },
            ],
            ..Default::default()
        }])
        .unwrap();
        let m = EmpiricalTranslationModel::new();
        let ids = keys(&["s"]);
        let nb = abe_bias(&ids, &keys(&["y"]), &m, &t, BiasVariant::NBest).unwrap();
        assert!((nb[0] + 2f64.ln()).abs() < 1e-15);
        let mx = abe_bias(&ids, &keys(&["y"]), &m, &t, BiasVariant::Max).unwrap();
        assert!((mx[0] - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn error_terms() {
        let m = model(&[("y1", "t1", "a"), ("y2", "t2", "a"), ("y2", "t3", "b"), ("y2", "t4", "b")]);
        let s = bt_scores(&[("t1", 0.5f64.ln()), ("t2", 0.0), ("t3", 0.25f64.ln()), ("t4", 0.5f64.ln())]);
        let nb = abe_error(&keys(&["y1", "y2"]), &m, &s, ErrorVariant::NBest).unwrap();
        assert!((nb[0] - 2f64.ln()).abs() < 1e-15);
        // translation "a" has weight 1/3, "b" weight 2/3 over its two rows
        let expected = (0.0 + 4f64.ln() + 2f64.ln()) / 3.0;
        assert!((nb[1] - expected).abs() < 1e-15);
        let mx = abe_error(&keys(&["y1", "y2"]), &m, &s, ErrorVariant::Max).unwrap();
        assert!((mx[1] - 4f64.ln()).abs() < 1e-15);
        let certain = bt_scores(&[("t1", 0.0), ("t2", 0.0), ("t3", 0.0), ("t4", 0.0)]);
        assert_eq!(abe_error(&keys(&["y1", "y2"]), &m, &certain, ErrorVariant::NBest).unwrap(), vec![0.0, 0.0]);
        let missing = bt_scores(&[("t1", 0.0)]);
        assert!(matches!(
            abe_error(&keys(&["y2"]), &m, &missing, ErrorVariant::NBest),
            Err(AcquisitionError::MissingScore { field: "bt_parse_logprob", .. })
        ));
    }

    #[test]
    fn diversity_gate() {
        let used = BTreeSet::from([1]);
        assert_eq!(abe_diversity(&[0, 1, 2], &used), vec![0.0, f64::NEG_INFINITY, 0.0]);
    }

    fn toy_inputs() -> (Vec<String>, Vec<String>, EmpiricalTranslationModel, ScoreTable, Vec<Vec<f64>>, Vec<usize>) {
        let ids: Vec<String> = (0..10).map(|i| format!("s{i}")).collect();
        let lf_keys: Vec<String> = (0..10).map(|i| format!("y{}", i % 5)).collect();
        let mut m = EmpiricalTranslationModel::new();
        let mut bt = Vec::new();
        for i in 0..5 {
            for j in 0..=i {
                let id = format!("t{i}_{j}");
                m.add(&format!("y{i}"), &id, &format!("text{}", j % 2));
                bt.push((id, -0.1 * (i + j) as f64));
            }
        }
        let scores = ScoreTable::from_records(bt.into_iter().map(|(id, lp)| ScoreRecord {
            id,
            bt_parse_logprob: Some(lp),
            ..Default::default()
        }))
        .unwrap();
        let emb: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64 * 0.3, (i % 3) as f64]).collect();
        let clusters = vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4];
        (ids, lf_keys, m, scores, emb, clusters)
    }

    #[test]
    fn diversity_only_is_first_per_cluster() {
        let (ids, lf_keys, m, scores, emb, clusters) = toy_inputs();
        let inputs = AbeInputs {
            ids: &ids,
            lf_keys: &lf_keys,
            model: &m,
            scores: &scores,
            embeddings: &emb,
            clusters: &clusters,
            density_k: 2,
            bandwidth: 1.0,
        };
        let coef = AbeCoefficients { bias: 0.0, error: 0.0, density: 0.0, diversity: 1.0 };
        let picks = abe_select(&inputs, BiasVariant::Factorized, ErrorVariant::NBest, coef, &mut BTreeSet::new(), 5).unwrap();
        assert_eq!(picks.iter().map(|p| p.index).collect::<Vec<_>>(), vec![0, 2, 4, 6, 8]);
    }

    #[test]
    fn hand_ranking_without_gate() {
        // bias and error only, scored once: bias -H(y_i) with H decreasing
        // in translation diversity, error the mean NLL
        let (ids, lf_keys, m, scores, emb, clusters) = toy_inputs();
        let inputs = AbeInputs {
            ids: &ids,
            lf_keys: &lf_keys,
            model: &m,
            scores: &scores,
            embeddings: &emb,
            clusters: &clusters,
            density_k: 2,
            bandwidth: 1.0,
        };
        let coef = AbeCoefficients { bias: 1.0, error: 0.0, density: 0.0, diversity: 0.0 };
        let picks = abe_select(&inputs, BiasVariant::Factorized, ErrorVariant::NBest, coef, &mut BTreeSet::new(), 10).unwrap();
        // y0 has one translation (H = 0), every other LF mixes two strings
        assert_eq!(picks[0].index, 0);
        assert_eq!(picks[1].index, 5);
        let coef = AbeCoefficients { bias: 0.0, error: 1.0, density: 0.0, diversity: 0.0 };
        let picks = abe_select(&inputs, BiasVariant::Factorized, ErrorVariant::NBest, coef, &mut BTreeSet::new(), 10).unwrap();
        // mean NLL of y_i is 0.1 * (i + i / 2): y4, y4, y3, y3, ...
        assert_eq!(picks.iter().map(|p| p.index).collect::<Vec<_>>(), vec![4, 9, 3, 8, 2, 7, 1, 6, 0, 5]);
    }
}
