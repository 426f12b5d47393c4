use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::{index, SliceRandom};

use super::{MemoryBuffer, MemoryError};
use crate::dataset::Example;
use crate::features::{distance_matrix, kmedoids};
use crate::lf::{anonymize, smatch_sim, SmatchConfig, TypingRules, VariableScheme};
use crate::rng::seeded;

/// Action-subset size used for the city portion of NLMap.
pub const ACTION_SUBSET_NLMAP_CITY: usize = 300;
/// Action-subset size used for the question-type portion of NLMap.
pub const ACTION_SUBSET_NLMAP_QT: usize = 500;

/// Entropy gains at or below this are treated as ties.
const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DlfsOptions {
    /// Restrict the entropy to `h` actions drawn by training-set frequency.
    pub action_subset: Option<usize>,
    pub typing: TypingRules,
    pub smatch: SmatchConfig,
    pub kmedoids_iter: usize,
}

impl Default for DlfsOptions {
    fn default() -> Self {
        DlfsOptions {
            action_subset: None,
            typing: TypingRules::new(),
            smatch: SmatchConfig::default(),
            kmedoids_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DlfsResult {
    pub buffer: MemoryBuffer,
    /// Entropy after initialization and after every accepted replacement.
    pub entropy_trace: Vec<f64>,
    pub clusters: Vec<usize>,
    pub scope: Option<BTreeSet<String>>,
}

impl DlfsResult {
    pub fn entropy(&self) -> f64 {
        *self.entropy_trace.last().expect("trace starts with the initial entropy")
    }
}

/// Draws `h` distinct actions without replacement, each draw proportional
/// to training-set frequency. All actions are kept when `h` is at least
/// their number.
pub fn sample_action_subset(actions: &[Vec<String>], h: usize, seed: u64) -> BTreeSet<String> {
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for a in actions.iter().flatten() {
        *freq.entry(a).or_insert(0) += 1;
    }
    let items: Vec<(&str, usize)> = freq.into_iter().collect();
    let mut rng = seeded(seed);
    items
        .choose_multiple_weighted(&mut rng, h.min(items.len()), |(_, n)| *n as f64)
        .expect("positive finite weights")
        .map(|(a, _)| a.to_string())
        .collect()
}

/// K-medoids over examples with distance `1 - smatch_sim` between their
/// anonymized templates.
pub fn template_clusters(examples: &[Example], m: usize, seed: u64, opts: &DlfsOptions) -> Vec<usize> {
    let templates: Vec<_> = examples.iter().map(|e| anonymize(&e.lf, &opts.typing)).collect();
    let mut key_index: HashMap<String, usize> = HashMap::new();
    let mut distinct = Vec::new();
    let of: Vec<usize> = templates
        .iter()
        .map(|t| {
            *key_index.entry(t.key()).or_insert_with(|| {
                distinct.push(t);
                distinct.len() - 1
            })
        })
        .collect();
    let mut slots = BTreeMap::new();
    for t in &distinct {
        slots.extend(t.slot_types.clone());
    }
    let config = SmatchConfig { scheme: VariableScheme::with_slots(slots), ..opts.smatch.clone() };
    let template_dist = distance_matrix(distinct.len(), |i, j| 1.0 - smatch_sim(&distinct[i].lf, &distinct[j].lf, &config));
    let dist = distance_matrix(examples.len(), |i, j| template_dist[of[i]][of[j]]);
    kmedoids(&dist, m.min(examples.len()), seed, opts.kmedoids_iter).assignments
}

/// Running `sum n ln n` and `N` of in-scope action counts, so that the
/// entropy `ln N - S / N` of a replacement is evaluated from the changed
/// actions only.
struct EntropyState {
    counts: Vec<u64>,
    total: f64,
    s: f64,
}

fn nln(n: f64) -> f64 {
    if n > 0.0 {
        n * n.ln()
    } else {
        0.0
    }
}

impl EntropyState {
    fn entropy_of(total: f64, s: f64) -> f64 {
        if total > 0.0 {
            total.ln() - s / total
        } else {
            0.0
        }
    }

    fn entropy(&self) -> f64 {
        Self::entropy_of(self.total, self.s)
    }

    fn deltas(out: &[u32], inn: &[u32]) -> HashMap<u32, i64> {
        let mut d: HashMap<u32, i64> = HashMap::new();
        for &a in out {
            *d.entry(a).or_insert(0) -= 1;
        }
        for &a in inn {
            *d.entry(a).or_insert(0) += 1;
        }
        d
    }

    fn entropy_after(&self, out: &[u32], inn: &[u32]) -> f64 {
        let (mut total, mut s) = (self.total, self.s);
        for (a, d) in Self::deltas(out, inn) {
            let n = self.counts[a as usize] as f64;
            s += nln(n + d as f64) - nln(n);
            total += d as f64;
        }
        Self::entropy_of(total, s)
    }

    fn apply(&mut self, out: &[u32], inn: &[u32]) {
        for (a, d) in Self::deltas(out, inn) {
            self.counts[a as usize] = (self.counts[a as usize] as i64 + d) as u64;
        }
        self.total = self.counts.iter().sum::<u64>() as f64;
        self.s = self.counts.iter().map(|&n| nln(n as f64)).sum();
    }
}

/// DLFS over precomputed cluster labels. `m` clusters are drawn at random
/// and one random member of each fills a slot. Sweeps then visit every
/// slot and try every member of its cluster as a replacement, accepting
/// any that strictly raises the entropy; sweeps repeat until one brings no
/// gain.
pub fn dlfs_with_clusters(
    actions: &[Vec<String>],
    clusters: &[usize],
    m: usize,
    seed: u64,
    scope: Option<&BTreeSet<String>>,
) -> Result<DlfsResult, MemoryError> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in clusters.iter().enumerate() {
        members.entry(c).or_default().push(i);
    }
    if m > members.len() {
        return Err(MemoryError::CapacityExceedsClusters { capacity: m, clusters: members.len() });
    }

    let mut ids: HashMap<&str, u32> = HashMap::new();
    let scoped: Vec<Vec<u32>> = actions
        .iter()
        .map(|acts| {
            acts.iter()
                .filter(|a| scope.is_none_or(|s| s.contains(*a)))
                .map(|a| {
                    let n = ids.len() as u32;
                    *ids.entry(a.as_str()).or_insert(n)
                })
                .collect()
        })
        .collect();

    let mut rng = seeded(seed);
    let cluster_ids: Vec<usize> = members.keys().copied().collect();
    let mut chosen: Vec<usize> = index::sample(&mut rng, cluster_ids.len(), m).into_iter().map(|i| cluster_ids[i]).collect();
    chosen.sort_unstable();

    let mut buffer = MemoryBuffer::new(m);
    let mut state = EntropyState { counts: vec![0; ids.len()], total: 0.0, s: 0.0 };
    for &c in &chosen {
        let pick = *members[&c].choose(&mut rng).expect("nonempty cluster");
        buffer.push(pick, &actions[pick], Some(c))?;
        state.apply(&[], &scoped[pick]);
    }
    let mut h = state.entropy();
    let mut trace = vec![h];
    loop {
        let sweep_start = h;
        for (slot, &c) in chosen.iter().enumerate() {
            for &cand in &members[&c] {
                let current = buffer.entries()[slot];
                if cand == current {
                    continue;
                }
                let h_new = state.entropy_after(&scoped[current], &scoped[cand]);
                if h_new > h + EPS {
                    state.apply(&scoped[current], &scoped[cand]);
                    buffer.replace(slot, cand, &actions[cand], None);
                    h = state.entropy();
                    trace.push(h);
                }
            }
        }
        if h <= sweep_start + EPS {
            break;
        }
    }
    Ok(DlfsResult { buffer, entropy_trace: trace, clusters: clusters.to_vec(), scope: scope.cloned() })
}

/// Diversified logical-form selection: clusters the training set into `m`
/// template clusters and fills the memory one example per cluster so as to
/// maximize the entropy of its action distribution.
pub fn dlfs_sample(examples: &[Example], m: usize, seed: u64, opts: &DlfsOptions) -> Result<DlfsResult, MemoryError> {
    if m > examples.len() {
        return Err(MemoryError::CapacityExceedsPool { capacity: m, pool: examples.len() });
    }
    let actions: Vec<Vec<String>> = examples.iter().map(|e| e.lf.actions()).collect();
    let scope = opts.action_subset.map(|h| sample_action_subset(&actions, h, seed));
    let clusters = template_clusters(examples, m, seed, opts);
    dlfs_with_clusters(&actions, &clusters, m, seed, scope.as_ref())
}
