use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::dataset::Example;
use crate::lf::{anonymize, TypingRules};
use crate::rng::seeded;

/// Template-diversified subsample: examples are grouped by anonymized
/// template, groups and their members are shuffled, and one example is
/// drawn per group in turn until `k` are selected. Returns indices into
/// `examples` in draw order. `k` larger than the dataset selects everything.
pub fn uat_subsample(examples: &[Example], k: usize, seed: u64, typing: &TypingRules) -> Vec<usize> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, ex) in examples.iter().enumerate() {
        groups.entry(anonymize(&ex.lf, typing).key()).or_default().push(i);
    }
    let mut rng = seeded(seed);
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.shuffle(&mut rng);
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    let k = k.min(examples.len());
    let mut out = Vec::with_capacity(k);
    let mut round = 0;
    while out.len() < k {
        for g in &groups {
            if out.len() == k {
                break;
            }
            if let Some(&i) = g.get(round) {
                out.push(i);
            }
        }
        round += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::LogicalForm;
    use rand::seq::index;
    use std::collections::BTreeSet;

    fn corpus() -> Vec<Example> {
        // 4 templates with 1, 2, 3 and 6 members
        let mut lfs = vec!["( a 'x' )".to_string()];
        for v in ["p", "q"] {
            lfs.push(format!("( b '{v}' )"));
        }
        for v in ["p", "q", "r"] {
            lfs.push(format!("( c '{v}' ( d ) )"));
        }
        for v in 0..6 {
            lfs.push(format!("( e '{v}' )"));
        }
        lfs.iter()
            .enumerate()
            .map(|(i, lf)| Example::new(format!("ex{i}"), "u", LogicalForm::parse(lf).unwrap()))
            .collect()
    }

    fn templates(examples: &[Example], picks: &[usize]) -> usize {
        let typing = TypingRules::quoted_values();
        picks.iter().map(|&i| anonymize(&examples[i].lf, &typing).key()).collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn one_per_template() {
        let data = corpus();
        let picks = uat_subsample(&data, 4, 0, &TypingRules::quoted_values());
        assert_eq!(picks.len(), 4);
        assert_eq!(templates(&data, &picks), 4);
    }

    #[test]
    fn whole_dataset() {
        let data = corpus();
        let mut picks = uat_subsample(&data, data.len(), 5, &TypingRules::quoted_values());
        picks.sort_unstable();
        assert_eq!(picks, (0..data.len()).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic() {
        let data = corpus();
        let t = TypingRules::quoted_values();
        assert_eq!(uat_subsample(&data, 7, 9, &t), uat_subsample(&data, 7, 9, &t));
    }

    #[test]
    fn at_least_as_diverse_as_random() {
        let data = corpus();
        let t = TypingRules::quoted_values();
        for seed in 0..100 {
            for k in 1..=data.len() {
                let uat = templates(&data, &uat_subsample(&data, k, seed, &t));
                let mut rng = seeded(seed + 1000);
                let random = templates(&data, &index::sample(&mut rng, data.len(), k).into_vec());
                assert!(uat >= random, "seed {seed} k {k}");
            }
        }
    }
}
