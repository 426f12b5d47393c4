use rand::Rng;

use crate::rng::seeded;

/// Centroid clustering whose first `n_fixed` centers were given and never
/// move.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidClustering {
    pub centers: Vec<Vec<f64>>,
    pub n_fixed: usize,
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

impl CentroidClustering {
    pub fn is_fixed(&self, cluster: usize) -> bool {
        cluster < self.n_fixed
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the lowest index.
fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm over `fixed` plus `k_new` new centers, where only the
/// new centers are updated. New centers are seeded by squared-distance
/// sampling against all centers placed so far. A new center that loses all
/// its points is moved to the point farthest from its current center.
///
/// # Panics
/// If `k_new` is zero or `points` is empty.
pub fn incremental_kmeans(
    points: &[Vec<f64>],
    fixed: &[Vec<f64>],
    k_new: usize,
    seed: u64,
    max_iter: usize,
) -> CentroidClustering {
    assert!(k_new >= 1, "k_new must be positive");
    assert!(!points.is_empty(), "no points to cluster");
    let mut rng = seeded(seed);
    let mut centers: Vec<Vec<f64>> = fixed.to_vec();
    for _ in 0..k_new {
        let weights: Vec<f64> = if centers.is_empty() {
            vec![1.0; points.len()]
        } else {
            points.iter().map(|p| nearest(p, &centers).1).collect()
        };
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if r < *w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            pick
        } else {
            rng.gen_range(0..points.len())
        };
        centers.push(points[pick].clone());
    }

    let n_fixed = fixed.len();
    let dim = points[0].len();
    let mut assignments: Vec<usize> = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == assignments {
            break;
        }
        assignments = next;
        for c in n_fixed..centers.len() {
            let mut sum = vec![0.0; dim];
            let mut count = 0usize;
            for (p, _) in points.iter().zip(&assignments).filter(|(_, &a)| a == c) {
                for (s, x) in sum.iter_mut().zip(p) {
                    *s += x;
                }
                count += 1;
            }
            if count > 0 {
                centers[c] = sum.into_iter().map(|s| s / count as f64).collect();
            } else {
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        let da = squared_distance(&points[a], &centers[assignments[a]]);
                        let db = squared_distance(&points[b], &centers[assignments[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("nonempty");
                centers[c] = points[far].clone();
            }
        }
    }
    let assignments = points.iter().map(|p| nearest(p, &centers).0).collect();
    CentroidClustering { centers, n_fixed, assignments, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn plain_kmeans_without_fixed_centers() {
        let p = pts(&[0.0, 0.2, 0.4, 10.0, 10.2, 10.4]);
        let c = incremental_kmeans(&p, &[], 2, 1, 100);
        assert_eq!(c.n_fixed, 0);
        let mut centers: Vec<f64> = c.centers.iter().map(|v| v[0]).collect();
        centers.sort_by(f64::total_cmp);
        assert!((centers[0] - 0.2).abs() < 1e-12 && (centers[1] - 10.2).abs() < 1e-12);
    }

    #[test]
    fn new_center_takes_the_far_mass() {
        // fixed center at 0 owns the mass around it; the far mass averages to 10
        let p = pts(&[-0.1, 0.0, 0.1, 9.0, 10.0, 11.0]);
        for seed in 0..10 {
            let c = incremental_kmeans(&p, &[vec![0.0]], 1, seed, 100);
            assert_eq!(c.centers[0], vec![0.0]);
            assert!((c.centers[1][0] - 10.0).abs() < 1e-12, "seed {seed}: {:?}", c.centers);
            assert_eq!(c.assignments, vec![0, 0, 0, 1, 1, 1]);
        }
    }

    #[test]
    fn tie_goes_to_lowest_cluster() {
        assert_eq!(nearest(&[1.0], &[vec![0.0], vec![2.0]]).0, 0);
    }

    proptest! {
        #[test]
        fn fixed_centers_are_untouched(
            xs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..30),
            fixed in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 0..4),
            k in 1usize..4,
            seed in 0u64..100,
        ) {
            let points: Vec<Vec<f64>> = xs.iter().map(|&(a, b)| vec![a, b]).collect();
            let fixed: Vec<Vec<f64>> = fixed.iter().map(|&(a, b)| vec![a, b]).collect();
            let c = incremental_kmeans(&points, &fixed, k, seed, 50);
            prop_assert_eq!(&c.centers[..fixed.len()], &fixed[..]);
            prop_assert_eq!(c.centers.len(), fixed.len() + k);
            for (p, &a) in points.iter().zip(&c.assignments) {
                let d = squared_distance(p, &c.centers[a]);
                for (j, center) in c.centers.iter().enumerate() {
                    let dj = squared_distance(p, center);
                    prop_assert!(d < dj || (d == dj && a <= j));
                }
            }
        }
    }
}
