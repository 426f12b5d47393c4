use std::collections::{BTreeMap, HashMap};

use crate::lf::LogicalForm;

/// Sparse non-negative weights keyed by vocabulary index. Zero weights are
/// never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector(BTreeMap<usize, f64>);

impl SparseVector {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        SparseVector(pairs.into_iter().filter(|(_, w)| *w != 0.0).collect())
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0.get(&index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().map(|(&i, &w)| (i, w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for (i, w) in self.iter() {
            v[i] = w;
        }
        v
    }
}

/// Vocabulary and inverse document frequencies of a corpus of term bags.
#[derive(Debug, Clone)]
pub struct TfIdf {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
}

impl TfIdf {
    /// `idf = ln(N / df)`, unsmoothed.
    pub fn fit(docs: &[Vec<String>]) -> Self {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let n = docs.len() as f64;
        let vocab: Vec<String> = df.keys().map(|t| t.to_string()).collect();
        let idf = df.values().map(|&d| (n / d as f64).ln()).collect();
        let index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TfIdf { vocab, index, idf }
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.index.get(term).map(|&i| self.idf[i])
    }

    /// Raw term count times idf. Out-of-vocabulary terms are dropped.
    pub fn transform(&self, doc: &[String]) -> SparseVector {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(&i) = self.index.get(t) {
                *tf.entry(i).or_insert(0.0) += 1.0;
            }
        }
        SparseVector::from_pairs(tf.into_iter().map(|(i, c)| (i, c * self.idf[i])))
    }
}

/// TF-IDF vectors over the atoms and compounds of each logical form.
pub fn tfidf_featurize(lfs: &[&LogicalForm]) -> (TfIdf, Vec<SparseVector>) {
    let docs: Vec<Vec<String>> = lfs.iter().map(|lf| lf.structure_terms()).collect();
    let model = TfIdf::fit(&docs);
    let vectors = docs.iter().map(|d| model.transform(d)).collect();
    (model, vectors)
}
