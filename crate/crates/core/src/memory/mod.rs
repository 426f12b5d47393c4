//! Replay-memory samplers for continual semantic parsing.
//!
//! A memory holds at most `capacity` training examples. Its quality is
//! measured by the entropy of the parse-action distribution over its
//! entries; DLFS raises that entropy while keeping at most one example per
//! cluster of structurally similar logical forms.

mod baselines;
mod buffer;
mod dlfs;

pub use baselines::{balance_sample, fss_sample, lfs_sample, prior_sample, random_sample};
pub use buffer::{memory_entropy, MemoryBuffer, MemoryRow};
pub use dlfs::{
    dlfs_sample, dlfs_with_clusters, sample_action_subset, template_clusters, DlfsOptions, DlfsResult,
    ACTION_SUBSET_NLMAP_CITY, ACTION_SUBSET_NLMAP_QT,
};

#[derive(Debug, thiserror::Error)]
pub enum MemoryError {
    #[error("memory is empty")]
    EmptyBuffer,
    #[error("memory is full (capacity {0})")]
    Full(usize),
    #[error("capacity {capacity} exceeds the {clusters} available clusters")]
    CapacityExceedsClusters { capacity: usize, clusters: usize },
    #[error("capacity {capacity} exceeds the {pool} available examples")]
    CapacityExceedsPool { capacity: usize, pool: usize },
    #[error("no embedding for {0:?}")]
    MissingEmbedding(String),
    #[error("no best_logprob score for {0:?}")]
    MissingScore(String),
}
