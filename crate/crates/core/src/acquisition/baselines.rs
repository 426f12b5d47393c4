use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::{index, SliceRandom};

use super::{argmax, check_budget, AcquisitionError, Pick, ScoreTable};
use crate::lf::LogicalForm;
use crate::rng::seeded;

/// The `k` highest scores; ties go to the lowest index.
pub fn top_k(scores: &[f64], k: usize) -> Result<Vec<Pick>, AcquisitionError> {
    check_budget(k, scores.len())?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order.into_iter().take(k).map(|index| Pick { index, score: scores[index] }).collect())
}

pub fn random_select(n: usize, k: usize, seed: u64) -> Result<Vec<Pick>, AcquisitionError> {
    check_budget(k, n)?;
    let mut rng = seeded(seed);
    Ok(index::sample(&mut rng, n, k).into_iter().map(|index| Pick { index, score: 0.0 }).collect())
}

/// One random member from each cluster, clusters visited in random order;
/// further rounds over the clusters when `k` exceeds their number.
pub fn cluster_select(clusters: &[usize], k: usize, seed: u64) -> Result<Vec<Pick>, AcquisitionError> {
    check_budget(k, clusters.len())?;
    let mut rng = seeded(seed);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in clusters.iter().enumerate() {
        groups.entry(c).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.shuffle(&mut rng);
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    let mut out = Vec::with_capacity(k);
    let mut round = 0;
    while out.len() < k {
        for g in &groups {
            if out.len() < k {
                if let Some(&index) = g.get(round) {
                    out.push(Pick { index, score: 0.0 });
                }
            }
        }
        round += 1;
    }
    Ok(out)
}

/// Greedily picks the LF adding the most atoms and compounds not yet
/// covered by `covered` or earlier picks.
pub fn max_compound_select(
    lfs: &[&LogicalForm],
    covered: &BTreeSet<String>,
    k: usize,
) -> Result<Vec<Pick>, AcquisitionError> {
    check_budget(k, lfs.len())?;
    let terms: Vec<BTreeSet<String>> = lfs.iter().map(|lf| lf.structure_terms().into_iter().collect()).collect();
    let mut covered = covered.clone();
    let mut remaining: Vec<usize> = (0..lfs.len()).collect();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let (index, score) =
            argmax(&remaining, |i| terms[i].iter().filter(|t| !covered.contains(*t)).count() as f64).expect("budget checked");
        remaining.retain(|&i| i != index);
        covered.extend(terms[index].iter().cloned());
        out.push(Pick { index, score });
    }
    Ok(out)
}

/// Most frequent LF keys in the pool first, lower perplexity first within
/// equal frequency.
pub fn traffic_select(
    ids: &[String],
    lf_keys: &[String],
    scores: &ScoreTable,
    k: usize,
) -> Result<Vec<Pick>, AcquisitionError> {
    check_budget(k, ids.len())?;
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for key in lf_keys {
        *freq.entry(key).or_insert(0) += 1;
    }
    let ppl: Vec<f64> = ids
        .iter()
        .map(|id| scores.field(id, "perplexity", |r| r.perplexity))
        .collect::<Result<_, _>>()?;
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| {
        freq[lf_keys[b].as_str()]
            .cmp(&freq[lf_keys[a].as_str()])
            .then(ppl[a].total_cmp(&ppl[b]))
            .then(a.cmp(&b))
    });
    Ok(order
        .into_iter()
        .take(k)
        .map(|index| Pick { index, score: freq[lf_keys[index].as_str()] as f64 })
        .collect())
}

/// Lowest `log P(x | y)` first.
pub fn lcs_bw_select(ids: &[String], scores: &ScoreTable, k: usize) -> Result<Vec<Pick>, AcquisitionError> {
    let s: Vec<f64> = ids
        .iter()
        .map(|id| Ok(-scores.field(id, "gen_logprob", |r| r.gen_logprob)?))
        .collect::<Result<_, AcquisitionError>>()?;
    top_k(&s, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::ScoreRecord;

    #[test]
    fn top_k_ties() {
        let picks = top_k(&[1.0, 3.0, 3.0, f64::NEG_INFINITY, 2.0], 4).unwrap();
        assert_eq!(picks.iter().map(|p| p.index).collect::<Vec<_>>(), vec![1, 2, 4, 0]);
        assert!(top_k(&[1.0], 2).is_err());
    }

    #[test]
    fn random_is_reproducible() {
        let a = random_select(100, 10, 4).unwrap();
        assert_eq!(a, random_select(100, 10, 4).unwrap());
        let distinct: BTreeSet<usize> = a.iter().map(|p| p.index).collect();
        assert_eq!(distinct.len(), 10);
    }

    #[test]
    fn cluster_one_per_group() {
        let clusters = [0, 0, 1, 1, 1, 2, 3, 3];
        let picks = cluster_select(&clusters, 4, 9).unwrap();
        let cs: BTreeSet<usize> = picks.iter().map(|p| clusters[p.index]).collect();
        assert_eq!(cs.len(), 4);
        let all = cluster_select(&clusters, 8, 9).unwrap();
        assert_eq!(all.iter().map(|p| p.index).collect::<BTreeSet<_>>().len(), 8);
    }

    #[test]
    fn max_compound_is_greedy_optimal_per_step() {
        let texts = [
            "( a b )",
            "( a b c )",
            "( d ( e f ) )",
            "( a ( e f ) )",
            "( g h i j )",
            "( a b )",
            "( k ( l m ) n )",
            "( d e )",
            "( g h )",
            "( o )",
        ];
        let lfs: Vec<LogicalForm> = texts.iter().map(|t| LogicalForm::parse(t).unwrap()).collect();
        let refs: Vec<&LogicalForm> = lfs.iter().collect();
        let picks = max_compound_select(&refs, &BTreeSet::new(), 5).unwrap();
        // brute force: at every step no remaining LF adds more new terms
        let mut covered: BTreeSet<String> = BTreeSet::new();
        let mut chosen = BTreeSet::new();
        for p in &picks {
            let gain = |i: usize| lfs[i].structure_terms().into_iter().collect::<BTreeSet<_>>().difference(&covered).count();
            for i in (0..lfs.len()).filter(|i| !chosen.contains(i)) {
                assert!(gain(i) <= gain(p.index));
            }
            assert_eq!(gain(p.index) as f64, p.score);
            chosen.insert(p.index);
            covered.extend(lfs[p.index].structure_terms());
        }
    }

    #[test]
    fn traffic_and_lcs_bw() {
        let ids: Vec<String> = (0..4).map(|i| format!("x{i}")).collect();
        let keys: Vec<String> = ["y1", "y2", "y1", "y3"].iter().map(|s| s.to_string()).collect();
        let scores = ScoreTable::from_records((0..4).map(|i| ScoreRecord {
            id: format!("x{i}"),
            perplexity: Some([9.0, 1.0, 3.0, 2.0][i]),
            gen_logprob: Some([-1.0, -4.0, -2.0, -3.0][i]),
            ..Default::default()
        }))
        .unwrap();
        let t = traffic_select(&ids, &keys, &scores, 4).unwrap();
        assert_eq!(t.iter().map(|p| p.index).collect::<Vec<_>>(), vec![2, 0, 1, 3]);
        let l = lcs_bw_select(&ids, &scores, 2).unwrap();
        assert_eq!(l.iter().map(|p| p.index).collect::<Vec<_>>(), vec![1, 3]);
        assert!(matches!(
            traffic_select(&ids, &keys, &ScoreTable::default(), 1),
            Err(AcquisitionError::MissingScore { field: "perplexity", .. })
        ));
    }
}
