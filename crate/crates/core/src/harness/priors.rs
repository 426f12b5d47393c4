use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::HarnessError;
use crate::dataset::Example;
use crate::lf::action_predicate;

/// `1 - lev(a, b) / max(|a|, |b|)` over characters; 1 for two empty strings.
pub fn char_sim(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    (longest - strsim::levenshtein(a, b)) as f64 / longest as f64
}

/// Per parse action, a distribution over utterance words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentPriors {
    pub rows: BTreeMap<String, BTreeMap<String, f64>>,
}

impl AlignmentPriors {
    pub fn row(&self, action: &str) -> Option<&BTreeMap<String, f64>> {
        self.rows.get(action)
    }
}

/// Mixes co-occurrence and string similarity into word priors per action:
/// `g(a, x) = gamma * P(a | x) + (1 - gamma) * char_sim(pred(a), x)`, where
/// `P(a | x)` is the share of utterances containing `x` whose LF emits `a`
/// and `pred(a)` is the predicate the action names. Each row is normalized
/// over the vocabulary; a row of zeros becomes uniform.
pub fn alignment_priors(corpus: &[Example], gamma: f64) -> Result<AlignmentPriors, HarnessError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(HarnessError::Config(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if corpus.is_empty() {
        return Err(HarnessError::Config("alignment priors need a nonempty corpus".into()));
    }
    let mut word_docs: BTreeMap<&str, f64> = BTreeMap::new();
    let mut joint: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    let actions_per_doc: Vec<BTreeSet<String>> = corpus.iter().map(|e| e.lf.actions().into_iter().collect()).collect();
    for (e, actions) in corpus.iter().zip(&actions_per_doc) {
        let words: BTreeSet<&str> = e.utterance.iter().map(String::as_str).collect();
        for &w in &words {
            *word_docs.entry(w).or_insert(0.0) += 1.0;
            for a in actions {
                *joint.entry((a.as_str(), w)).or_insert(0.0) += 1.0;
            }
        }
    }
    let all_actions: BTreeSet<&str> = actions_per_doc.iter().flatten().map(String::as_str).collect();
    let rows = all_actions
        .into_iter()
        .map(|a| {
            let pred = action_predicate(a);
            let mut row: BTreeMap<String, f64> = word_docs
                .iter()
                .map(|(&w, &n)| {
                    let p = joint.get(&(a, w)).copied().unwrap_or(0.0) / n;
                    (w.to_string(), gamma * p + (1.0 - gamma) * char_sim(pred, w))
                })
                .collect();
            let total: f64 = row.values().sum();
            let len = row.len() as f64;
            for v in row.values_mut() {
                *v = if total > 0.0 { *v / total } else { 1.0 / len };
            }
            (a.to_string(), row)
        })
        .collect();
    Ok(AlignmentPriors { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::LogicalForm;

    fn corpus() -> Vec<Example> {
        [
            ("what is the weather today", "ask_weather(date('today'))"),
            ("weather in melbourne", "ask_weather(city('melbourne'))"),
            ("remind me tomorrow", "set_reminder(date('tomorrow'))"),
        ]
        .iter()
        .enumerate()
        .map(|(i, (u, lf))| Example::new(format!("c{i}"), u, LogicalForm::parse(lf).unwrap()))
        .collect()
    }

    #[test]
    fn char_sim_cases() {
        assert_eq!(char_sim("ask_weather", "weather"), 7.0 / 11.0);
        assert_eq!(char_sim("", ""), 1.0);
        assert_eq!(char_sim("abc", "xyz"), 0.0);
    }

    #[test]
    fn rows_are_distributions() {
        for gamma in [0.0, 0.3, 1.0] {
            let p = alignment_priors(&corpus(), gamma).unwrap();
            assert!(!p.rows.is_empty());
            for row in p.rows.values() {
                assert!((row.values().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_one_follows_cooccurrence() {
        let c = corpus();
        let p = alignment_priors(&c, 1.0).unwrap();
        let action = c[0].lf.actions().into_iter().find(|a| action_predicate(a) == "ask_weather").unwrap();
        let row = p.row(&action).unwrap();
        assert_eq!(action, "REDUCE ask_weather:-date");
        // the action occurs only with the first utterance; "weather" also
        // occurs in the second, so P(a | weather) = 1/2 and the others are 1
        let support: BTreeSet<&str> = row.iter().filter(|(_, &v)| v > 0.0).map(|(w, _)| w.as_str()).collect();
        assert_eq!(support, "what is the weather today".split(' ').collect());
        assert!((row["weather"] - 0.5 / 4.5).abs() < 1e-15);
        assert!((row["today"] - 1.0 / 4.5).abs() < 1e-15);
        assert!(alignment_priors(&c, 1.5).is_err());
        assert!(alignment_priors(&[], 0.5).is_err());
    }

    #[test]
    fn gamma_zero_prefers_similar_words() {
        let c = corpus();
        let p = alignment_priors(&c, 0.0).unwrap();
        let action = c[0].lf.actions().into_iter().find(|a| action_predicate(a) == "ask_weather").unwrap();
        let row = p.row(&action).unwrap();
        let best = row.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, "weather");
    }
}
