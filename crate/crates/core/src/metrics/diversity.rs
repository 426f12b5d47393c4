use std::collections::{BTreeMap, HashSet};

use super::MetricsError;

/// Type-token ratio at which an MTLD factor is closed.
pub const MTLD_THRESHOLD: f64 = 0.72;

/// Unique tokens over total tokens.
pub fn ttr<S: AsRef<str>>(tokens: &[S]) -> Result<f64, MetricsError> {
    if tokens.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let types: HashSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
    Ok(types.len() as f64 / tokens.len() as f64)
}

fn mtld_pass<'a>(tokens: impl Iterator<Item = &'a str>, len: usize, all_ttr: f64) -> f64 {
    let mut types = HashSet::new();
    let mut count = 0usize;
    let mut factors = 0.0;
    let mut ratio = 1.0;
    for t in tokens {
        count += 1;
        types.insert(t);
        ratio = types.len() as f64 / count as f64;
        if ratio <= MTLD_THRESHOLD {
            factors += 1.0;
            types.clear();
            count = 0;
        }
    }
    if count > 0 {
        factors += (1.0 - ratio) / (1.0 - MTLD_THRESHOLD);
    }
    if factors == 0.0 {
        // the ratio never fell: one factor for a fully distinct stream
        factors = if all_ttr == 1.0 { 1.0 } else { (1.0 - all_ttr) / (1.0 - MTLD_THRESHOLD) };
    }
    len as f64 / factors
}

/// Measure of textual lexical diversity: the stream length divided by the
/// number of segments whose running type-token ratio stays above
/// [`MTLD_THRESHOLD`], a trailing partial segment counting fractionally.
/// The forward and backward passes are averaged.
pub fn mtld<S: AsRef<str>>(tokens: &[S]) -> Result<f64, MetricsError> {
    let all = ttr(tokens)?;
    let fwd = mtld_pass(tokens.iter().map(AsRef::as_ref), tokens.len(), all);
    let bwd = mtld_pass(tokens.iter().rev().map(AsRef::as_ref), tokens.len(), all);
    Ok((fwd + bwd) / 2.0)
}

/// Relative frequencies of the n-grams of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramProfile {
    n: usize,
    probs: BTreeMap<Vec<String>, f64>,
}

impl NgramProfile {
    pub fn from_corpus<S: AsRef<str>>(sentences: &[Vec<S>], n: usize) -> Result<Self, MetricsError> {
        if n == 0 {
            return Err(MetricsError::InvalidProfile("n must be positive".into()));
        }
        let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
        for s in sentences {
            if s.len() >= n {
                for w in s.windows(n) {
                    *counts.entry(w.iter().map(|t| t.as_ref().to_string()).collect()).or_insert(0) += 1;
                }
            }
        }
        let total: usize = counts.values().sum();
        if total == 0 {
            return Err(MetricsError::EmptyCorpus);
        }
        let probs = counts.into_iter().map(|(g, c)| (g, c as f64 / total as f64)).collect();
        Ok(NgramProfile { n, probs })
    }

    pub fn from_probabilities(n: usize, probs: BTreeMap<Vec<String>, f64>) -> Result<Self, MetricsError> {
        if let Some(g) = probs.keys().find(|g| g.len() != n) {
            return Err(MetricsError::InvalidProfile(format!("{g:?} is not a {n}-gram")));
        }
        if probs.values().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(MetricsError::InvalidProfile("probabilities must lie in [0, 1]".into()));
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidProfile(format!("probabilities sum to {sum}")));
        }
        Ok(NgramProfile { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, gram: &[String]) -> f64 {
        self.probs.get(gram).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, f64)> {
        self.probs.iter().map(|(g, &p)| (g, p))
    }
}

/// Jensen-Shannon divergence in bits against the midpoint mixture.
pub fn js_divergence(p: &NgramProfile, q: &NgramProfile) -> Result<f64, MetricsError> {
    if p.n != q.n {
        return Err(MetricsError::ProfileMismatch { left: p.n, right: q.n });
    }
    let half_kl = |a: &NgramProfile, b: &NgramProfile| -> f64 {
        a.iter()
            .filter(|&(_, pa)| pa > 0.0)
            .map(|(g, pa)| {
                let m = (pa + b.get(g)) / 2.0;
                pa * (pa / m).log2()
            })
            .sum::<f64>()
            / 2.0
    };
    Ok((half_kl(p, q) + half_kl(q, p)).clamp(0.0, 1.0))
}
