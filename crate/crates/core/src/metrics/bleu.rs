use std::collections::HashMap;

use super::MetricsError;

/// Stand-in for a zero n-gram precision in sentence-level Self-BLEU.
pub const SELF_BLEU_EPSILON: f64 = 1e-9;

/// Whitespace tokenization.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    out
}

/// Clipped n-gram matches and the candidate's n-gram count.
pub fn modified_precision<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>], n: usize) -> (usize, usize) {
    let cand = ngrams(candidate, n);
    let refs: Vec<_> = references.iter().map(|r| ngrams(r, n)).collect();
    let clipped = cand
        .iter()
        .map(|(g, &c)| c.min(refs.iter().map(|r| r.get(g).copied().unwrap_or(0)).max().unwrap_or(0)))
        .sum();
    (clipped, cand.values().sum())
}

fn brevity_penalty<S: AsRef<str>>(c: usize, references: &[Vec<S>]) -> f64 {
    let r = references
        .iter()
        .map(Vec::len)
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0);
    if c == 0 {
        0.0
    } else if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

fn bleu_with<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>], n: usize, floor: Option<f64>) -> f64 {
    assert!(n >= 1, "BLEU order must be positive");
    let mut log_sum = 0.0;
    for k in 1..=n {
        let (hit, total) = modified_precision(candidate, references, k);
        let p = if total == 0 { 0.0 } else { hit as f64 / total as f64 };
        let p = match floor {
            Some(eps) if p == 0.0 => eps,
            _ => p,
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    100.0 * brevity_penalty(candidate.len(), references) * (log_sum / n as f64).exp()
}

/// Sentence BLEU with uniform weights over 1..=n-gram precisions and the
/// brevity penalty against the closest reference length, on a 0-100 scale.
/// Unsmoothed: any zero precision gives 0.
pub fn bleu_n<S: AsRef<str>>(candidate: &[S], references: &[Vec<S>], n: usize) -> f64 {
    bleu_with(candidate, references, n, None)
}

/// Mean BLEU of each sentence against all the others; higher means a less
/// diverse corpus. Zero precisions are replaced by [`SELF_BLEU_EPSILON`].
pub fn self_bleu<S: AsRef<str> + Clone>(corpus: &[Vec<S>], n: usize) -> Result<f64, MetricsError> {
    if corpus.len() < 2 {
        return Err(MetricsError::CorpusTooSmall(corpus.len()));
    }
    let total: f64 = (0..corpus.len())
        .map(|i| {
            let refs: Vec<Vec<S>> =
                corpus.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, s)| s.clone()).collect();
            bleu_with(&corpus[i], &refs, n, Some(SELF_BLEU_EPSILON))
        })
        .sum();
    Ok(total / corpus.len() as f64)
}
