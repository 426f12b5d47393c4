//! Data-side toolkit for low-resource semantic parsing.
//!
//! The crate covers the parts of a semantic parsing pipeline that do not
//! require a neural model:
//!
//! * [`lf`]: logical forms as ordered labeled trees, with decomposition into
//!   atoms, compounds and parse actions, template anonymization, Smatch-style
//!   similarity and idiom-based template normalization.
//! * [`scfg`]: synchronous context-free grammars that derive paired
//!   (canonical utterance, logical form) examples.
//! * [`features`]: TF-IDF featurization, k-medoids, incremental k-means and
//!   kNN kernel density.
//! * [`acquisition`]: active-learning acquisition functions and greedy
//!   batch selection.
//! * [`memory`]: replay-memory samplers for continual semantic parsing.
//! * [`metrics`]: exact/set match, SQL component F1, BLEU, Self-BLEU, MTLD,
//!   TTR and Jensen-Shannon divergence.
//! * [`harness`]: active-learning simulation loops, paraphrase filtering and
//!   alignment priors.
//!
//! Model outputs (confidences, n-best lists, back-translation likelihoods,
//! embeddings) are ingested from JSON-lines files rather than computed.

pub mod acquisition;
pub mod dataset;
pub mod features;
pub mod harness;
pub mod lf;
pub mod memory;
pub mod metrics;
pub mod scfg;

mod rng;

pub use dataset::{Example, DatasetError};
pub use lf::{LfError, LfNode, LogicalForm};
