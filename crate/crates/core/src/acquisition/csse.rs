use crate::features::{cosine, FeatureError};

use super::AcquisitionError;

/// Smallest denominator used in the similarity ratio.
const MIN_DENSITY: f64 = 1e-12;

/// Half the mean cosine to the `k` most similar points of `all`, excluding
/// position `skip`.
fn half_knn_cosine(x: &[f64], all: &[&[f64]], skip: usize, k: usize) -> f64 {
    let mut sims: Vec<f64> = all.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, z)| cosine(x, z)).collect();
    sims.sort_by(|a, b| b.total_cmp(a));
    sims[..k].iter().sum::<f64>() / (2 * k) as f64
}

/// Density-weighted dissimilarity to the labeled set. With
/// `ratio(x, x') = cos(x, x') / (d(x) + d(x'))` and `d` half the mean
/// cosine to the `k` nearest neighbours within pool and labeled set
/// together, a candidate scores `-max` of its ratio over labeled points, so
/// dense points far from everything labeled rank first. With no labeled
/// points the score is the mean kNN cosine.
pub fn csse_score(pool: &[Vec<f64>], labeled: &[Vec<f64>], k: usize) -> Result<Vec<f64>, AcquisitionError> {
    let all: Vec<&[f64]> = pool.iter().chain(labeled).map(Vec::as_slice).collect();
    if k == 0 || k >= all.len() {
        return Err(FeatureError::PoolTooSmall { k, pool: all.len() }.into());
    }
    let density: Vec<f64> = (0..all.len()).map(|i| half_knn_cosine(all[i], &all, i, k)).collect();
    Ok((0..pool.len())
        .map(|i| {
            if labeled.is_empty() {
                return 2.0 * density[i];
            }
            let worst = (0..labeled.len())
                .map(|j| {
                    let l = pool.len() + j;
                    cosine(all[i], all[l]) / (density[i] + density[l]).max(MIN_DENSITY)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            -worst
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors_have_unit_ratio() {
        let pool = vec![vec![1.0, 1.0]; 4];
        let labeled = vec![vec![2.0, 2.0]];
        for s in csse_score(&pool, &labeled, 2).unwrap() {
            assert!((s + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn copy_of_labeled_point_scores_lowest() {
        let pool = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7], vec![-1.0, 0.1]];
        let labeled = vec![vec![1.0, 0.0]];
        let s = csse_score(&pool, &labeled, 2).unwrap();
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(s[0], min);
    }

    #[test]
    fn six_point_hand_instance() {
        // pool: e1, e2, e1+e2 directions; labeled: e1, e2, -e1; k = 1
        let pool = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]];
        let labeled = vec![vec![3.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]];
        let s = csse_score(&pool, &labeled, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // half nearest cosines: pool 0.5, 0.5, r/2; labeled 0.5, 0.5, 0 (best is e2 at cos 0)
        let d = [0.5, 0.5, r / 2.0, 0.5, 0.5, 0.0];
        let ratio = |cos: f64, a: usize, b: usize| cos / (d[a] + d[b]);
        let expected = [
            -[ratio(1.0, 0, 3), ratio(0.0, 0, 4), ratio(-1.0, 0, 5)].into_iter().fold(f64::MIN, f64::max),
            -[ratio(0.0, 1, 3), ratio(1.0, 1, 4), ratio(0.0, 1, 5)].into_iter().fold(f64::MIN, f64::max),
            -[ratio(r, 2, 3), ratio(r, 2, 4), ratio(-r, 2, 5)].into_iter().fold(f64::MIN, f64::max),
        ];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{s:?} vs {expected:?}");
        }
        assert!((s[0] + 1.0).abs() < 1e-12);
        assert!((s[2] + r / (r / 2.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn empty_labeled_set_is_density() {
        let pool = vec![vec![1.0, 0.0], vec![1.0, 0.1], vec![0.0, 1.0]];
        let s = csse_score(&pool, &[], 1).unwrap();
        assert!((s[0] - cosine(&pool[0], &pool[1])).abs() < 1e-12);
        assert!(s[2] < s[0]);
        assert!(csse_score(&pool, &[], 3).is_err());
    }
}
