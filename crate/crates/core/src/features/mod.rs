//! Featurization, clustering and density estimation shared by the
//! acquisition and memory modules.

mod density;
mod embeddings;
mod kmeans;
mod kmedoids;
mod tfidf;

pub use density::{cosine, cosine_distance, kernel_density, kernel_density_all, DEFAULT_BANDWIDTH};
pub use embeddings::{read_embeddings, Embeddings};
pub use kmeans::{incremental_kmeans, squared_distance, CentroidClustering};
pub use kmedoids::{distance_matrix, kmedoids, MedoidClustering};
pub use tfidf::{tfidf_featurize, SparseVector, TfIdf};

use crate::dataset::DatasetError;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("need more than {k} points for {k} neighbours, pool has {pool}")]
    PoolTooSmall { k: usize, pool: usize },
    #[error("embedding {id:?} has dimension {found}, expected {expected}")]
    DimensionMismatch { id: String, expected: usize, found: usize },
    #[error("embedding {0:?} has a non-finite entry")]
    NonFinite(String),
    #[error("duplicate embedding id {0:?}")]
    DuplicateId(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}
