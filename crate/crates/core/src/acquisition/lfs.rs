use std::collections::{BTreeSet, HashMap};

use super::{argmax, check_budget, quantile_normalize, AcquisitionError, Pick};
use crate::features::{incremental_kmeans, squared_distance, tfidf_featurize};
use crate::lf::LogicalForm;

/// Weights of the combined structure/lexical score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfsParams {
    /// Weight of the structure term relative to the lexical term.
    pub alpha: f64,
    /// Decay applied to atoms and compounds already covered by the labeled
    /// set, in `[0, 1]`.
    pub beta: f64,
}

impl LfsParams {
    pub const GEOQUERY: LfsParams = LfsParams { alpha: 0.75, beta: 0.75 };
    pub const NLMAP: LfsParams = LfsParams { alpha: 0.25, beta: 0.75 };
}

/// Co-occurrence counts between LF structure terms and utterance words.
#[derive(Debug, Clone, Default)]
pub struct CooccurrenceModel {
    counts: HashMap<String, HashMap<String, f64>>,
}

impl CooccurrenceModel {
    /// Every distinct atom/compound term of an LF co-occurs once with every
    /// token occurrence of its utterance.
    pub fn fit<'a>(pairs: impl IntoIterator<Item = (&'a [String], &'a LogicalForm)>) -> Self {
        let mut counts: HashMap<String, HashMap<String, f64>> = HashMap::new();
        for (utterance, lf) in pairs {
            let terms: BTreeSet<String> = lf.structure_terms().into_iter().collect();
            for t in terms {
                let row = counts.entry(t).or_default();
                for w in utterance {
                    *row.entry(w.clone()).or_insert(0.0) += 1.0;
                }
            }
        }
        CooccurrenceModel { counts }
    }

    /// Entropy of `p(w | term)`; zero for unseen terms.
    pub fn entropy(&self, term: &str) -> f64 {
        let Some(row) = self.counts.get(term) else { return 0.0 };
        let total: f64 = row.values().sum();
        if total == 0.0 {
            return 0.0;
        }
        -row.values().map(|c| (c / total) * (c / total).ln()).sum::<f64>()
    }
}

/// Negative squared distance to the own cluster center, or `-inf` when that
/// cluster already holds a selected example.
pub fn lfsd_score(feature: &[f64], center: &[f64], cluster_used: bool) -> f64 {
    if cluster_used {
        f64::NEG_INFINITY
    } else {
        -squared_distance(feature, center)
    }
}

/// Mean over the distinct terms of an LF of `lambda * H(p(w | term))`,
/// where `lambda = beta` for terms already covered and 1 otherwise.
pub fn lcd_score(terms: &BTreeSet<String>, model: &CooccurrenceModel, covered: &BTreeSet<String>, beta: f64) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let sum: f64 = terms
        .iter()
        .map(|t| if covered.contains(t) { beta } else { 1.0 } * model.entropy(t))
        .sum();
    sum / terms.len() as f64
}

/// Covered terms and occupied clusters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionState {
    pub covered: BTreeSet<String>,
    pub used_clusters: BTreeSet<usize>,
}

/// Per-candidate inputs of [`lfs_lc_d_select`].
#[derive(Debug, Clone)]
pub struct LfsInputs {
    pub features: Vec<Vec<f64>>,
    pub clusters: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub terms: Vec<BTreeSet<String>>,
    pub model: CooccurrenceModel,
}

/// Builds selection inputs for one round: TF-IDF over pool and labeled LFs,
/// incremental k-means with the labeled examples as fixed centers and `k`
/// new centers, and co-occurrence counts from `source_pairs`. The returned
/// state marks every labeled term as covered and every fixed cluster as
/// used.
pub fn prepare_lfs_lc_d<'a>(
    pool: &[&LogicalForm],
    labeled: &[&LogicalForm],
    source_pairs: impl IntoIterator<Item = (&'a [String], &'a LogicalForm)>,
    k: usize,
    seed: u64,
) -> (LfsInputs, SelectionState) {
    let all: Vec<&LogicalForm> = labeled.iter().chain(pool).copied().collect();
    let (model, vectors) = tfidf_featurize(&all);
    let dense: Vec<Vec<f64>> = vectors.iter().map(|v| v.to_dense(model.dim())).collect();
    let (fixed, features) = dense.split_at(labeled.len());
    let clustering = incremental_kmeans(features, fixed, k.max(1), seed, 100);
    let state = SelectionState {
        covered: labeled.iter().flat_map(|lf| lf.structure_terms()).collect(),
        used_clusters: (0..clustering.n_fixed).collect(),
    };
    let inputs = LfsInputs {
        features: features.to_vec(),
        clusters: clustering.assignments,
        centers: clustering.centers,
        terms: pool.iter().map(|lf| lf.structure_terms().into_iter().collect()).collect(),
        model: CooccurrenceModel::fit(source_pairs),
    };
    (inputs, state)
}

/// Greedy selection of `k` candidates by `alpha * q(lfsd) + q(lcd)`, where
/// `q` is quantile normalization over the remaining candidates. Each pick
/// marks its cluster used and its terms covered. If every remaining
/// candidate sits in a used cluster, the structure term is dropped for the
/// remaining picks.
pub fn lfs_lc_d_select(
    inputs: &LfsInputs,
    state: &mut SelectionState,
    params: LfsParams,
    k: usize,
) -> Result<Vec<Pick>, AcquisitionError> {
    let n = inputs.features.len();
    check_budget(k, n)?;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let structure: Vec<f64> = remaining
            .iter()
            .map(|&i| {
                let c = inputs.clusters[i];
                lfsd_score(&inputs.features[i], &inputs.centers[c], state.used_clusters.contains(&c))
            })
            .collect();
        let lexical: Vec<f64> = remaining
            .iter()
            .map(|&i| lcd_score(&inputs.terms[i], &inputs.model, &state.covered, params.beta))
            .collect();
        let gated = structure.iter().all(|s| *s == f64::NEG_INFINITY);
        let qs = quantile_normalize(&structure);
        let qc = quantile_normalize(&lexical);
        let positions: Vec<usize> = (0..remaining.len()).collect();
        let (pos, score) = argmax(&positions, |p| {
            if gated {
                qc[p]
            } else {
                params.alpha * qs[p] + qc[p]
            }
        })
        .expect("k <= pool size");
        let index = remaining.remove(pos);
        state.used_clusters.insert(inputs.clusters[index]);
        state.covered.extend(inputs.terms[index].iter().cloned());
        picks.push(Pick { index, score });
    }
    Ok(picks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn lf(s: &str) -> LogicalForm {
        LogicalForm::parse(s).unwrap()
    }

    #[test]
    fn lcd_entropy_cases() {
        let a = lf("( f x )");
        let u1 = toks("one");
        let model = CooccurrenceModel::fit([(&u1[..], &a)]);
        let terms: BTreeSet<String> = a.structure_terms().into_iter().collect();
        assert_eq!(lcd_score(&terms, &model, &BTreeSet::new(), 0.5), 0.0);

        let b = lf("x");
        let (u2, u3) = (toks("red"), toks("blue"));
        let model = CooccurrenceModel::fit([(&u2[..], &b), (&u3[..], &b)]);
        assert!((model.entropy("A:x") - 2f64.ln()).abs() < 1e-15);
        let terms: BTreeSet<String> = ["A:x".to_string()].into();
        assert!((lcd_score(&terms, &model, &BTreeSet::new(), 0.5) - 2f64.ln()).abs() < 1e-15);
        // beta = 0 removes covered terms
        assert_eq!(lcd_score(&terms, &model, &terms, 0.0), 0.0);
        // beta = 1 is the same as no coverage
        assert_eq!(lcd_score(&terms, &model, &terms, 1.0), lcd_score(&terms, &model, &BTreeSet::new(), 1.0));
    }

    #[test]
    fn lfsd_cases() {
        assert_eq!(lfsd_score(&[1.0, 2.0], &[1.0, 2.0], false), 0.0);
        assert_eq!(lfsd_score(&[1.0, 2.0], &[1.0, 2.0], true), f64::NEG_INFINITY);
        assert_eq!(lfsd_score(&[0.0, 0.0], &[3.0, 4.0], false), -25.0);
    }

    #[test]
    fn picks_distinct_clusters() {
        let pool: Vec<LogicalForm> = [
            "( answer ( state all ) )",
            "( answer ( state ( loc s0 ) ) )",
            "( answer ( river all ) )",
            "( answer ( river ( loc s0 ) ) )",
            "( answer ( city all ) )",
            "( answer ( count ( city all ) ) )",
        ]
        .iter()
        .map(|s| lf(s))
        .collect();
        let utterances: Vec<Vec<String>> = (0..pool.len()).map(|i| toks(&format!("w{i} common"))).collect();
        let refs: Vec<&LogicalForm> = pool.iter().collect();
        let pairs = utterances.iter().map(|u| &u[..]).zip(pool.iter());
        let (inputs, mut state) = prepare_lfs_lc_d(&refs, &[], pairs, 3, 0);
        let picks = lfs_lc_d_select(&inputs, &mut state, LfsParams::GEOQUERY, 3).unwrap();
        let clusters: BTreeSet<usize> = picks.iter().map(|p| inputs.clusters[p.index]).collect();
        assert_eq!(clusters.len(), 3);
        assert!(matches!(
            lfs_lc_d_select(&inputs, &mut SelectionState::default(), LfsParams::NLMAP, 7),
            Err(AcquisitionError::BudgetExceedsPool { .. })
        ));
    }

    #[test]
    fn labeled_examples_fix_clusters() {
        let pool = [lf("( a b )"), lf("( a c )"), lf("( d e )")];
        let labeled = [lf("( a b )")];
        let refs: Vec<&LogicalForm> = pool.iter().collect();
        let lrefs: Vec<&LogicalForm> = labeled.iter().collect();
        let (inputs, state) = prepare_lfs_lc_d(&refs, &lrefs, std::iter::empty(), 1, 0);
        assert_eq!(state.used_clusters, BTreeSet::from([0]));
        assert!(state.covered.contains("A:b"));
        // the pool copy of the labeled LF sits on the fixed center
        assert_eq!(inputs.clusters[0], 0);
    }
}
