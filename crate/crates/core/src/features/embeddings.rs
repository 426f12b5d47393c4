use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::FeatureError;
use crate::dataset::read_jsonl;

#[derive(Deserialize)]
struct Record {
    id: String,
    vector: Vec<f64>,
}

/// Externally computed vectors keyed by example id, all of one dimension.
#[derive(Debug, Clone, Default)]
pub struct Embeddings {
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl Embeddings {
    pub fn new() -> Self {
        Embeddings::default()
    }

    pub fn insert(&mut self, id: &str, vector: Vec<f64>) -> Result<(), FeatureError> {
        if let Some(first) = self.vectors.first() {
            if first.len() != vector.len() {
                return Err(FeatureError::DimensionMismatch {
                    id: id.to_string(),
                    expected: first.len(),
                    found: vector.len(),
                });
            }
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(FeatureError::NonFinite(id.to_string()));
        }
        if self.index.contains_key(id) {
            return Err(FeatureError::DuplicateId(id.to_string()));
        }
        self.index.insert(id.to_string(), self.ids.len());
        self.ids.push(id.to_string());
        self.vectors.push(vector);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.vectors[i].as_slice())
    }

    pub fn dim(&self) -> Option<usize> {
        self.vectors.first().map(Vec::len)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Reads `{"id": ..., "vector": [...]}` lines. The first record fixes the
/// dimension.
pub fn read_embeddings(path: &Path) -> Result<Embeddings, FeatureError> {
    let mut out = Embeddings::new();
    for r in read_jsonl::<Record>(path)? {
        out.insert(&r.id, r.vector)?;
    }
    Ok(out)
}
