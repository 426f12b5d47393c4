use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MemoryError;

/// Capacity-bounded memory of training-example indices with the action
/// counts of its entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBuffer {
    capacity: usize,
    entries: Vec<usize>,
    entry_actions: Vec<Vec<String>>,
    clusters: Vec<Option<usize>>,
    action_counts: BTreeMap<String, usize>,
}

impl MemoryBuffer {
    pub fn new(capacity: usize) -> Self {
        MemoryBuffer {
            capacity,
            entries: Vec::new(),
            entry_actions: Vec::new(),
            clusters: Vec::new(),
            action_counts: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Training-set indices of the entries, by slot.
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn cluster_of(&self, slot: usize) -> Option<usize> {
        self.clusters[slot]
    }

    pub fn action_counts(&self) -> &BTreeMap<String, usize> {
        &self.action_counts
    }

    pub fn push(&mut self, index: usize, actions: &[String], cluster: Option<usize>) -> Result<(), MemoryError> {
        if self.entries.len() == self.capacity {
            return Err(MemoryError::Full(self.capacity));
        }
        self.add_counts(actions);
        self.entries.push(index);
        self.entry_actions.push(actions.to_vec());
        self.clusters.push(cluster);
        Ok(())
    }

    /// Replaces the entry in `slot`, keeping its cluster label unless a new
    /// one is given.
    pub fn replace(&mut self, slot: usize, index: usize, actions: &[String], cluster: Option<usize>) {
        let old = std::mem::replace(&mut self.entry_actions[slot], actions.to_vec());
        for a in &old {
            let n = self.action_counts.get_mut(a).expect("counted action");
            *n -= 1;
            if *n == 0 {
                self.action_counts.remove(a);
            }
        }
        self.add_counts(actions);
        self.entries[slot] = index;
        if cluster.is_some() {
            self.clusters[slot] = cluster;
        }
    }

    fn add_counts(&mut self, actions: &[String]) {
        for a in actions {
            *self.action_counts.entry(a.clone()).or_insert(0) += 1;
        }
    }

    /// Whether the stored counts equal a recount over the entries.
    pub fn counts_consistent(&self) -> bool {
        let mut recount: BTreeMap<String, usize> = BTreeMap::new();
        for actions in &self.entry_actions {
            for a in actions {
                *recount.entry(a.clone()).or_insert(0) += 1;
            }
        }
        recount == self.action_counts
    }

    /// Whether no two entries carry the same cluster label.
    pub fn one_per_cluster(&self) -> bool {
        let labeled: Vec<usize> = self.clusters.iter().flatten().copied().collect();
        labeled.len() == labeled.iter().collect::<BTreeSet<_>>().len()
    }

    /// Manifest rows, one per slot.
    pub fn rows(&self, task: &str, ids: &[String]) -> Vec<MemoryRow> {
        (0..self.entries.len())
            .map(|slot| MemoryRow {
                task: task.to_string(),
                slot,
                id: ids[self.entries[slot]].clone(),
                cluster: self.clusters[slot],
                actions: self.entry_actions[slot].clone(),
            })
            .collect()
    }
}

/// One line of a memory manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryRow {
    pub task: String,
    pub slot: usize,
    pub id: String,
    pub cluster: Option<usize>,
    pub actions: Vec<String>,
}

/// Entropy of a count table restricted to `scope`.
pub(crate) fn count_entropy<'a>(counts: impl Iterator<Item = (&'a String, &'a usize)>, scope: Option<&BTreeSet<String>>) -> f64 {
    let kept: Vec<f64> = counts
        .filter(|(a, _)| scope.is_none_or(|s| s.contains(*a)))
        .map(|(_, &n)| n as f64)
        .filter(|&n| n > 0.0)
        .collect();
    let total: f64 = kept.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    -kept.iter().map(|n| (n / total) * (n / total).ln()).sum::<f64>()
}

/// Entropy in nats of the action distribution of the memory, over the
/// actions in `scope` (all actions when `None`).
pub fn memory_entropy(buffer: &MemoryBuffer, scope: Option<&BTreeSet<String>>) -> Result<f64, MemoryError> {
    if buffer.is_empty() {
        return Err(MemoryError::EmptyBuffer);
    }
    Ok(count_entropy(buffer.action_counts.iter(), scope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn acts(a: &[&str]) -> Vec<String> {
        a.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn entropy_cases() {
        let mut b = MemoryBuffer::new(4);
        assert!(matches!(memory_entropy(&b, None), Err(MemoryError::EmptyBuffer)));
        b.push(0, &acts(&["a", "b", "c", "d"]), None).unwrap();
        assert!((memory_entropy(&b, None).unwrap() - 4f64.ln()).abs() < 1e-15);

        let mut single = MemoryBuffer::new(2);
        single.push(0, &acts(&["a", "a"]), None).unwrap();
        assert_eq!(memory_entropy(&single, None).unwrap(), 0.0);

        // counts (2, 1, 1): -(1/2 ln 1/2 + 2 * 1/4 ln 1/4)
        let mut c = MemoryBuffer::new(2);
        c.push(0, &acts(&["a", "b"]), None).unwrap();
        c.push(1, &acts(&["a", "c"]), None).unwrap();
        let expected = -(0.5 * 0.5f64.ln() + 2.0 * 0.25 * 0.25f64.ln());
        assert!((memory_entropy(&c, None).unwrap() - expected).abs() < 1e-15);
        let scope: BTreeSet<String> = ["b", "c"].iter().map(|s| s.to_string()).collect();
        assert!((memory_entropy(&c, Some(&scope)).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(c.push(2, &acts(&["x"]), None), Err(MemoryError::Full(2))));
    }

    proptest! {
        #[test]
        fn counts_track_entries(ops in prop::collection::vec((0usize..4, prop::collection::vec(0u8..5, 0..6)), 1..30)) {
            let mut b = MemoryBuffer::new(4);
            for (i, (slot, acts)) in ops.iter().enumerate() {
                let actions: Vec<String> = acts.iter().map(|a| format!("a{a}")).collect();
                if b.len() < b.capacity() {
                    b.push(i, &actions, Some(i)).unwrap();
                } else {
                    b.replace(*slot, i, &actions, None);
                }
                prop_assert!(b.counts_consistent());
            }
        }
    }
}
