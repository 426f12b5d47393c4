use super::FeatureError;

pub const DEFAULT_BANDWIDTH: f64 = 1.0;

/// Cosine similarity; zero vectors have similarity 0 to everything.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - cosine(a, b)
}

/// Log of the mean exponential kernel `exp(-d / h)` over the `k` nearest
/// neighbours of `pool[query]` under cosine distance, excluding the query
/// itself.
pub fn kernel_density(pool: &[Vec<f64>], k: usize, h: f64, query: usize) -> Result<f64, FeatureError> {
    if k == 0 || k >= pool.len() {
        return Err(FeatureError::PoolTooSmall { k, pool: pool.len() });
    }
    let mut d: Vec<f64> = pool
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != query)
        .map(|(_, p)| cosine_distance(&pool[query], p))
        .collect();
    d.sort_by(f64::total_cmp);
    let mean = d[..k].iter().map(|x| (-x / h).exp()).sum::<f64>() / k as f64;
    Ok(mean.ln())
}

/// [`kernel_density`] for every point of the pool.
pub fn kernel_density_all(pool: &[Vec<f64>], k: usize, h: f64) -> Result<Vec<f64>, FeatureError> {
    (0..pool.len()).map(|i| kernel_density(pool, k, h, i)).collect()
}
