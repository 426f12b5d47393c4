use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;

use super::buffer::count_entropy;
use super::dlfs::template_clusters;
use super::{DlfsOptions, MemoryBuffer, MemoryError};
use crate::acquisition::ScoreTable;
use crate::dataset::Example;
use crate::features::{distance_matrix, incremental_kmeans, kmedoids, squared_distance};
use crate::lf::{anonymize, smatch_sim, SmatchConfig, VariableScheme};
use crate::rng::seeded;

fn check(m: usize, pool: usize) -> Result<(), MemoryError> {
    if m > pool {
        Err(MemoryError::CapacityExceedsPool { capacity: m, pool })
    } else {
        Ok(())
    }
}

fn fill(actions: &[Vec<String>], picks: &[(usize, Option<usize>)], m: usize) -> MemoryBuffer {
    let mut buffer = MemoryBuffer::new(m);
    for &(i, c) in picks {
        buffer.push(i, &actions[i], c).expect("at most m picks");
    }
    buffer
}

pub fn random_sample(actions: &[Vec<String>], m: usize, seed: u64) -> Result<MemoryBuffer, MemoryError> {
    check(m, actions.len())?;
    let mut rng = seeded(seed);
    let picks: Vec<(usize, Option<usize>)> = index::sample(&mut rng, actions.len(), m).into_iter().map(|i| (i, None)).collect();
    Ok(fill(actions, &picks, m))
}

/// Clusters utterance embeddings with k-means and keeps, for each center,
/// the nearest example not already kept.
pub fn fss_sample(
    actions: &[Vec<String>],
    embeddings: &[Vec<f64>],
    m: usize,
    seed: u64,
) -> Result<MemoryBuffer, MemoryError> {
    check(m, actions.len())?;
    let clustering = incremental_kmeans(embeddings, &[], m, seed, 100);
    let mut taken = BTreeSet::new();
    let mut picks = Vec::with_capacity(m);
    for (c, center) in clustering.centers.iter().enumerate() {
        let best = (0..embeddings.len())
            .filter(|i| !taken.contains(i))
            .min_by(|&a, &b| squared_distance(&embeddings[a], center).total_cmp(&squared_distance(&embeddings[b], center)))
            .expect("m <= pool");
        taken.insert(best);
        picks.push((best, Some(c)));
    }
    Ok(fill(actions, &picks, m))
}

/// The medoids of a template clustering under `1 - smatch_sim`.
pub fn lfs_sample(examples: &[Example], m: usize, seed: u64, opts: &DlfsOptions) -> Result<MemoryBuffer, MemoryError> {
    check(m, examples.len())?;
    let actions: Vec<Vec<String>> = examples.iter().map(|e| e.lf.actions()).collect();
    let templates: Vec<_> = examples.iter().map(|e| anonymize(&e.lf, &opts.typing)).collect();
    let mut slots = BTreeMap::new();
    for t in &templates {
        slots.extend(t.slot_types.clone());
    }
    let config = SmatchConfig { scheme: VariableScheme::with_slots(slots), ..opts.smatch.clone() };
    let dist = distance_matrix(examples.len(), |i, j| 1.0 - smatch_sim(&templates[i].lf, &templates[j].lf, &config));
    let clustering = kmedoids(&dist, m, seed, opts.kmedoids_iter);
    let picks: Vec<(usize, Option<usize>)> = clustering.medoids.iter().enumerate().map(|(c, &i)| (i, Some(c))).collect();
    debug_assert_eq!(template_clusters(examples, m, seed, opts), clustering.assignments);
    Ok(fill(&actions, &picks, m))
}

/// Greedily adds the example that leaves the memory's action distribution
/// with the highest entropy; ties go to the lowest index.
pub fn balance_sample(actions: &[Vec<String>], m: usize) -> Result<MemoryBuffer, MemoryError> {
    check(m, actions.len())?;
    let mut buffer = MemoryBuffer::new(m);
    let mut used = vec![false; actions.len()];
    for _ in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..actions.len()).filter(|&i| !used[i]) {
            let mut counts = buffer.action_counts().clone();
            for a in &actions[i] {
                *counts.entry(a.clone()).or_insert(0) += 1;
            }
            let h = count_entropy(counts.iter(), None);
            if best.is_none_or(|(_, b)| h > b) {
                best = Some((i, h));
            }
        }
        let (i, _) = best.expect("m <= pool");
        used[i] = true;
        buffer.push(i, &actions[i], None)?;
    }
    Ok(buffer)
}

/// The `m` examples the model is most confident about.
pub fn prior_sample(
    actions: &[Vec<String>],
    ids: &[String],
    scores: &ScoreTable,
    m: usize,
) -> Result<MemoryBuffer, MemoryError> {
    check(m, actions.len())?;
    let conf: Vec<f64> = ids
        .iter()
        .map(|id| scores.get(id).and_then(|r| r.best_logprob).ok_or_else(|| MemoryError::MissingScore(id.clone())))
        .collect::<Result<_, _>>()?;
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| conf[b].total_cmp(&conf[a]).then(a.cmp(&b)));
    let picks: Vec<(usize, Option<usize>)> = order.into_iter().take(m).map(|i| (i, None)).collect();
    Ok(fill(actions, &picks, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::ScoreRecord;
    use crate::lf::LogicalForm;
    use crate::memory::memory_entropy;
    use rand::Rng;

    fn synthetic(seed: u64, n: usize, vocab: usize) -> Vec<Vec<String>> {
        let mut rng = seeded(seed);
        (0..n)
            .map(|_| {
                // skewed: low action ids are frequent
                let len = rng.gen_range(1..6);
                (0..len).map(|_| format!("a{}", rng.gen_range(0..vocab).min(rng.gen_range(0..vocab)))).collect()
            })
            .collect()
    }

    #[test]
    fn random_is_reproducible() {
        let a = synthetic(0, 30, 10);
        assert_eq!(random_sample(&a, 5, 3).unwrap(), random_sample(&a, 5, 3).unwrap());
        assert!(matches!(random_sample(&a, 31, 3), Err(MemoryError::CapacityExceedsPool { .. })));
    }

    #[test]
    fn fss_takes_nearest_to_centers() {
        let emb = vec![vec![0.0], vec![0.1], vec![0.2], vec![10.0], vec![10.1], vec![10.3]];
        let actions = vec![vec!["x".to_string()]; 6];
        let b = fss_sample(&actions, &emb, 2, 0).unwrap();
        let picked: BTreeSet<usize> = b.entries().iter().copied().collect();
        assert_eq!(picked, BTreeSet::from([1, 4]));
    }

    #[test]
    fn lfs_returns_medoids() {
        let lfs = ["( a ( b c ) )", "( a ( b d ) )", "( a ( b c ) )", "( x y )", "( x z )", "( x y )"];
        let examples: Vec<Example> =
            lfs.iter().enumerate().map(|(i, l)| Example::new(format!("e{i}"), "q", LogicalForm::parse(l).unwrap())).collect();
        let b = lfs_sample(&examples, 2, 0, &DlfsOptions::default()).unwrap();
        let heads: BTreeSet<&str> = b.entries().iter().map(|&i| examples[i].lf.root().label()).collect();
        assert_eq!(heads, BTreeSet::from(["a", "x"]));
    }

    #[test]
    fn balance_beats_random_on_average() {
        let (mut balance, mut random) = (0.0, 0.0);
        for seed in 0..100 {
            let a = synthetic(seed, 60, 15);
            balance += memory_entropy(&balance_sample(&a, 8).unwrap(), None).unwrap();
            random += memory_entropy(&random_sample(&a, 8, seed).unwrap(), None).unwrap();
        }
        assert!(balance > random, "{balance} vs {random}");
    }

    #[test]
    fn prior_takes_most_confident() {
        let actions = vec![vec!["x".to_string()]; 3];
        let ids: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
        let scores = ScoreTable::from_records(ids.iter().zip([-2.0, -0.1, -1.0]).map(|(id, lp)| ScoreRecord {
            id: id.clone(),
            best_logprob: Some(lp),
            ..Default::default()
        }))
        .unwrap();
        assert_eq!(prior_sample(&actions, &ids, &scores, 2).unwrap().entries(), &[1, 2]);
        assert!(matches!(
            prior_sample(&actions, &ids, &ScoreTable::default(), 1),
            Err(MemoryError::MissingScore(_))
        ));
    }
}
