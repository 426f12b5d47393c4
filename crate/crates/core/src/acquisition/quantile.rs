/// Replaces each finite score by its empirical quantile `(r - 1) / (n - 1)`,
/// where `r` is its 1-based rank among the `n` finite scores and tied scores
/// share the mean rank of their block. Scores within a relative `1e-12` of
/// the lowest score of a block join that block, so values that agree up to
/// rounding tie. A single finite score maps to 0.5. Infinite and NaN scores
/// are passed through unchanged.
pub fn quantile_normalize(scores: &[f64]) -> Vec<f64> {
    let mut finite: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].is_finite()).collect();
    finite.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let n = finite.len();
    let mut out = scores.to_vec();
    if n == 1 {
        out[finite[0]] = 0.5;
        return out;
    }
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && same(scores[finite[end]], scores[finite[start]]) {
            end += 1;
        }
        // 0-based ranks start..end-1 share their mean
        let mean_rank = (start + end - 1) as f64 / 2.0;
        for &i in &finite[start..end] {
            out[i] = mean_rank / (n - 1) as f64;
        }
        start = end;
    }
    out
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TIE * a.abs().max(b.abs())
}

const REL_TIE: f64 = 1e-12;
