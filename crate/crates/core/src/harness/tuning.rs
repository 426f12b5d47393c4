use std::path::Path;

use super::acquire::{acquire, SelectionContext};
use super::run::ManifestRow;
use super::{write_header, AcquisitionConfig, HarnessError, RunHeader};
use crate::acquisition::SelectionRow;
use crate::dataset::{to_jsonl, write_atomic, Example};

pub const ALPHA_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const BETA_GRID: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

/// One cell of the source-side tuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub alpha: f64,
    pub beta: f64,
    pub selected: Vec<SelectionRow>,
    /// Labeled examples followed by the selection, for external training.
    pub manifest: Vec<ManifestRow>,
}

impl GridCell {
    pub fn dir_name(&self) -> String {
        format!("alpha_{}_beta_{}", self.alpha, self.beta)
    }
}

/// Runs LFS-LC-D selection of `k` pool examples for every `(alpha, beta)`
/// pair. Parser training and evaluation of each cell happen externally.
pub fn tuning_grid(
    pool: &[Example],
    labeled: &[Example],
    k: usize,
    seed: u64,
    alphas: &[f64],
    betas: &[f64],
) -> Result<Vec<GridCell>, HarnessError> {
    let candidates: Vec<&Example> = pool.iter().collect();
    let labeled_refs: Vec<&Example> = labeled.iter().collect();
    let source: Vec<Example> = labeled.iter().chain(pool).cloned().collect();
    let ctx = SelectionContext {
        pool: &candidates,
        labeled: &labeled_refs,
        source: &source,
        targets: &[],
        scores: None,
        embeddings: None,
    };
    let mut cells = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            let cfg = AcquisitionConfig::LfsLcD { alpha, beta };
            cfg.validate()?;
            let picks = acquire(&cfg, &ctx, k, seed)?;
            let selected: Vec<SelectionRow> = picks
                .iter()
                .enumerate()
                .map(|(rank, p)| SelectionRow {
                    round: 1,
                    rank,
                    id: pool[p.index].id.clone(),
                    score: p.score,
                    method: cfg.name().to_string(),
                })
                .collect();
            let manifest =
                labeled.iter().chain(picks.iter().map(|p| &pool[p.index])).map(ManifestRow::source).collect();
            cells.push(GridCell { alpha, beta, selected, manifest });
        }
    }
    Ok(cells)
}

/// Writes a header and, per cell, `manifest.jsonl` and `selected.jsonl`.
pub fn write_grid(dir: &Path, cells: &[GridCell], seed: u64, config_hash: &str) -> Result<(), HarnessError> {
    write_header(dir, &RunHeader::new("tune", seed, config_hash))?;
    for c in cells {
        let d = dir.join(c.dir_name());
        write_atomic(&d.join("manifest.jsonl"), to_jsonl(&c.manifest).as_bytes())?;
        write_atomic(&d.join("selected.jsonl"), to_jsonl(&c.selected).as_bytes())?;
    }
    Ok(())
}
