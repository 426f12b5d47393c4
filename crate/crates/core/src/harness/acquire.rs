use std::collections::BTreeSet;

use super::{AcquisitionConfig, HarnessError};
use crate::acquisition::{
    abe_select, csse_score, lcs_bw_select, least_confidence, lfs_lc_d_select, max_compound_select, nbest_entropy,
    prepare_lfs_lc_d, random_select, top_k, traffic_select, AbeInputs, AcquisitionError, EmpiricalTranslationModel,
    LfsParams, Pick, ScoreTable,
};
use crate::dataset::Example;
use crate::features::{incremental_kmeans, Embeddings};
use crate::lf::LogicalForm;

/// A target-language training row: its manifest id, the LF key of its
/// example and its text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetRow {
    pub id: String,
    pub lf_key: String,
    pub text: String,
}

/// Everything an acquisition function may look at in one round.
#[derive(Debug, Clone, Copy)]
pub struct SelectionContext<'a> {
    /// Remaining candidates.
    pub pool: &'a [&'a Example],
    /// Examples selected in earlier rounds.
    pub labeled: &'a [&'a Example],
    /// Source-language utterance/LF pairs for co-occurrence statistics.
    pub source: &'a [Example],
    /// Target-language rows of the current training set.
    pub targets: &'a [TargetRow],
    pub scores: Option<&'a ScoreTable>,
    pub embeddings: Option<&'a Embeddings>,
}

impl<'a> SelectionContext<'a> {
    fn scores(&self, method: &str) -> Result<&'a ScoreTable, HarnessError> {
        self.scores.ok_or_else(|| HarnessError::Config(format!("method {method} needs a scores file")))
    }

    fn vectors(&self, method: &str, examples: &[&Example]) -> Result<Vec<Vec<f64>>, HarnessError> {
        let emb = self.embeddings.ok_or_else(|| HarnessError::Config(format!("method {method} needs an embeddings file")))?;
        examples
            .iter()
            .map(|e| emb.get(&e.id).map(<[f64]>::to_vec).ok_or_else(|| AcquisitionError::MissingEmbedding(e.id.clone()).into()))
            .collect()
    }

    fn ids(&self) -> Vec<String> {
        self.pool.iter().map(|e| e.id.clone()).collect()
    }

    fn lf_keys(&self) -> Vec<String> {
        self.pool.iter().map(|e| e.lf.to_sexpr()).collect()
    }
}

/// Runs the configured acquisition function and returns `k` picks as
/// indices into `ctx.pool`, best first.
pub fn acquire(cfg: &AcquisitionConfig, ctx: &SelectionContext<'_>, k: usize, seed: u64) -> Result<Vec<Pick>, HarnessError> {
    let name = cfg.name();
    let pool_lfs: Vec<&LogicalForm> = ctx.pool.iter().map(|e| &e.lf).collect();
    let picks = match *cfg {
        AcquisitionConfig::Random => random_select(ctx.pool.len(), k, seed)?,
        AcquisitionConfig::MaxCompound => {
            let covered: BTreeSet<String> = ctx.labeled.iter().flat_map(|e| e.lf.structure_terms()).collect();
            max_compound_select(&pool_lfs, &covered, k)?
        }
        AcquisitionConfig::LfsLcD { alpha, beta } => {
            let labeled: Vec<&LogicalForm> = ctx.labeled.iter().map(|e| &e.lf).collect();
            let pairs = ctx.source.iter().map(|e| (e.utterance.as_slice(), &e.lf));
            let (inputs, mut state) = prepare_lfs_lc_d(&pool_lfs, &labeled, pairs, k, seed);
            lfs_lc_d_select(&inputs, &mut state, LfsParams { alpha, beta }, k)?
        }
        AcquisitionConfig::LeastConfidence => top_k(&least_confidence(&ctx.ids(), ctx.scores(name)?)?, k)?,
        AcquisitionConfig::NbestEntropy => top_k(&nbest_entropy(&ctx.ids(), ctx.scores(name)?)?, k)?,
        AcquisitionConfig::LcsBw => lcs_bw_select(&ctx.ids(), ctx.scores(name)?, k)?,
        AcquisitionConfig::Traffic => traffic_select(&ctx.ids(), &ctx.lf_keys(), ctx.scores(name)?, k)?,
        AcquisitionConfig::Csse { k: knn } => {
            let pool = ctx.vectors(name, ctx.pool)?;
            let labeled = ctx.vectors(name, ctx.labeled)?;
            top_k(&csse_score(&pool, &labeled, knn)?, k)?
        }
        AcquisitionConfig::Abe { bias, error, coefficients, density_k, bandwidth } => {
            let mut model = EmpiricalTranslationModel::new();
            for row in ctx.targets {
                model.add(&row.lf_key, &row.id, &row.text);
            }
            let embeddings = ctx.vectors(name, ctx.pool)?;
            let clusters = incremental_kmeans(&embeddings, &[], k.max(1), seed, 100).assignments;
            let (ids, lf_keys) = (ctx.ids(), ctx.lf_keys());
            let inputs = AbeInputs {
                ids: &ids,
                lf_keys: &lf_keys,
                model: &model,
                scores: ctx.scores(name)?,
                embeddings: &embeddings,
                clusters: &clusters,
                density_k: density_k.min(ctx.pool.len().saturating_sub(1)).max(1),
                bandwidth,
            };
            abe_select(&inputs, bias, error, coefficients, &mut BTreeSet::new(), k)?
        }
    };
    Ok(picks)
}
