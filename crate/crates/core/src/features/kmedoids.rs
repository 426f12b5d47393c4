use rand::seq::index;

use crate::rng::seeded;

/// Partition around medoids. Cluster `c` is represented by the item
/// `medoids[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MedoidClustering {
    pub medoids: Vec<usize>,
    pub assignments: Vec<usize>,
    pub cost: f64,
    /// Total cost after initialization and after every accepted swap.
    pub cost_trace: Vec<f64>,
}

impl MedoidClustering {
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().enumerate().filter(move |(_, &c)| c == cluster).map(|(i, _)| i)
    }
}

/// Symmetric distance matrix from a pairwise function evaluated once per
/// unordered pair; the diagonal is zero.
pub fn distance_matrix(n: usize, mut dist: impl FnMut(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(i, j);
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    m
}

fn assign(dist: &[Vec<f64>], medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let assignments = (0..dist.len())
        .map(|i| {
            let mut best = 0;
            for c in 1..medoids.len() {
                if dist[i][medoids[c]] < dist[i][medoids[best]] {
                    best = c;
                }
            }
            cost += dist[i][medoids[best]];
            best
        })
        .collect();
    (assignments, cost)
}

/// PAM with a seeded random initialization: each iteration applies the
/// single medoid/non-medoid swap that lowers total cost the most, until no
/// swap improves or `max_iter` swaps were made. Ties among points go to the
/// lowest cluster id.
///
/// # Panics
/// If `m` is zero or exceeds the number of items.
pub fn kmedoids(dist: &[Vec<f64>], m: usize, seed: u64, max_iter: usize) -> MedoidClustering {
    let n = dist.len();
    assert!(m >= 1 && m <= n, "need 1 <= m <= n (m = {m}, n = {n})");
    let mut rng = seeded(seed);
    let mut medoids = index::sample(&mut rng, n, m).into_vec();
    medoids.sort_unstable();
    let (mut assignments, mut cost) = assign(dist, &medoids);
    let mut cost_trace = vec![cost];
    for _ in 0..max_iter {
        // nearest and second-nearest medoid distance of every point
        let (near, second): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|j| {
                let mut d: Vec<f64> = medoids.iter().map(|&md| dist[j][md]).collect();
                d.sort_by(f64::total_cmp);
                (d[0], d.get(1).copied().unwrap_or(f64::INFINITY))
            })
            .unzip();
        let mut best: Option<(usize, usize, f64)> = None;
        for o in 0..n {
            if medoids.contains(&o) {
                continue;
            }
            // cost change of swapping o in for medoid c is shared + removal[c]
            let mut shared = 0.0;
            let mut removal = vec![0.0; m];
            for j in 0..n {
                let gain = (dist[o][j] - near[j]).min(0.0);
                shared += gain;
                removal[assignments[j]] += dist[o][j].min(second[j]) - near[j] - gain;
            }
            for (c, r) in removal.iter().enumerate() {
                let delta = shared + r;
                if delta < best.map_or(-1e-12, |b| b.2) {
                    best = Some((c, o, delta));
                }
            }
        }
        let Some((c, o, _)) = best else { break };
        let mut trial = medoids.clone();
        trial[c] = o;
        let (a, new_cost) = assign(dist, &trial);
        if new_cost >= cost {
            break;
        }
        (medoids, assignments, cost) = (trial, a, new_cost);
        cost_trace.push(cost);
    }
    MedoidClustering { medoids, assignments, cost, cost_trace }
}
