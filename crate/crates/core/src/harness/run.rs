use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::acquire::{acquire, SelectionContext, TargetRow};
use super::{write_header, AlConfig, HarnessError, Mode, RunHeader};
use crate::acquisition::{read_score_table, ScoreTable, SelectionRow};
use crate::dataset::{read_examples, read_jsonl, to_jsonl, write_atomic, DatasetError, Example};
use crate::features::{read_embeddings, Embeddings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    /// Source-language example.
    Source,
    /// Machine translation of a pool example.
    Machine,
    /// Human translation of a selected example.
    Human,
}

impl Origin {
    fn prefix(self) -> &'static str {
        match self {
            Origin::Source => "src",
            Origin::Machine => "mt",
            Origin::Human => "ht",
        }
    }
}

/// One row of a training manifest. `id` is the source id prefixed by the
/// row's origin, so source, MT and HT rows of one example never collide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub source_id: String,
    pub origin: Origin,
    /// Round in which the row entered the training set.
    pub round: usize,
    pub language: String,
    pub utterance: String,
    pub lf: String,
}

impl ManifestRow {
    pub fn new(example: &Example, origin: Origin, round: usize, language: &str, utterance: &str) -> Self {
        ManifestRow {
            id: format!("{}:{}", origin.prefix(), example.id),
            source_id: example.id.clone(),
            origin,
            round,
            language: language.to_string(),
            utterance: utterance.to_string(),
            lf: example.lf.to_sexpr(),
        }
    }

    pub fn source(example: &Example) -> Self {
        ManifestRow::new(example, Origin::Source, 0, &example.language, &example.utterance_text())
    }
}

/// The outcome of one round; round 0 holds the initial training set.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundArtifact {
    pub round: usize,
    pub selected: Vec<SelectionRow>,
    pub revealed: Vec<ManifestRow>,
    pub manifest: Vec<ManifestRow>,
    pub snapshot: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct TranslationRecord {
    id: String,
    text: String,
}

/// Reads a JSON-lines file of `{id, text}` translations.
pub fn read_translations(path: &Path) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut out = BTreeMap::new();
    for r in read_jsonl::<TranslationRecord>(path)? {
        if out.insert(r.id.clone(), r.text).is_some() {
            return Err(DatasetError::DuplicateId(r.id).into());
        }
    }
    Ok(out)
}

/// Loaded inputs of a run.
#[derive(Debug, Clone, Default)]
pub struct RunInputs {
    pub pool: Vec<Example>,
    pub human: BTreeMap<String, String>,
    pub machine: Option<BTreeMap<String, String>>,
    pub scores: Option<ScoreTable>,
    pub embeddings: Option<Embeddings>,
}

impl RunInputs {
    pub fn load(cfg: &AlConfig) -> Result<Self, HarnessError> {
        Ok(RunInputs {
            pool: read_examples(&cfg.data.pool)?,
            human: read_translations(&cfg.data.human_translations)?,
            machine: cfg.data.machine_translations.as_deref().map(read_translations).transpose()?,
            scores: cfg.data.scores.as_deref().map(read_score_table).transpose()?,
            embeddings: cfg.data.embeddings.as_deref().map(read_embeddings).transpose()?,
        })
    }
}

fn snapshot(round_selected: usize, cumulative: usize, remaining: usize, manifest: &[ManifestRow]) -> BTreeMap<String, f64> {
    let count = |o: Origin| manifest.iter().filter(|r| r.origin == o).count() as f64;
    BTreeMap::from([
        ("selected".to_string(), round_selected as f64),
        ("cumulative_selected".to_string(), cumulative as f64),
        ("pool_remaining".to_string(), remaining as f64),
        ("manifest_rows".to_string(), manifest.len() as f64),
        ("source_rows".to_string(), count(Origin::Source)),
        ("mt_rows".to_string(), count(Origin::Machine)),
        ("ht_rows".to_string(), count(Origin::Human)),
    ])
}

/// Replays the selection loop in memory. Round `q` scores the remaining
/// pool, takes its budget, reveals the human translations of the picks and
/// appends them to the training set; picked examples leave the pool.
pub fn simulate(mode: Mode, cfg: &AlConfig, inputs: &RunInputs) -> Result<Vec<RoundArtifact>, HarnessError> {
    let pool = &inputs.pool;
    let mut seen = HashSet::new();
    for e in pool {
        if !seen.insert(e.id.as_str()) {
            return Err(DatasetError::DuplicateId(e.id.clone()).into());
        }
    }
    let budgets = cfg.budget.per_round(pool.len())?;
    cfg.acquisition.validate()?;

    let mut manifest: Vec<ManifestRow> = pool.iter().map(ManifestRow::source).collect();
    let mut targets: Vec<TargetRow> = Vec::new();
    if mode == Mode::Hat {
        let machine = inputs
            .machine
            .as_ref()
            .ok_or_else(|| HarnessError::Config("hat mode needs a machine translation file".into()))?;
        for e in pool {
            let text = machine.get(&e.id).ok_or_else(|| HarnessError::MissingMachineTranslation(e.id.clone()))?;
            let row = ManifestRow::new(e, Origin::Machine, 0, &cfg.target_language, text);
            targets.push(TargetRow { id: row.id.clone(), lf_key: row.lf.clone(), text: text.clone() });
            manifest.push(row);
        }
    }

    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut labeled: Vec<usize> = Vec::new();
    let mut rounds = vec![RoundArtifact {
        round: 0,
        selected: Vec::new(),
        revealed: Vec::new(),
        snapshot: snapshot(0, 0, remaining.len(), &manifest),
        manifest: manifest.clone(),
    }];
    for (q, &k) in budgets.iter().enumerate() {
        let round = q + 1;
        let candidates: Vec<&Example> = remaining.iter().map(|&i| &pool[i]).collect();
        let labeled_refs: Vec<&Example> = labeled.iter().map(|&i| &pool[i]).collect();
        let ctx = SelectionContext {
            pool: &candidates,
            labeled: &labeled_refs,
            source: pool,
            targets: &targets,
            scores: inputs.scores.as_ref(),
            embeddings: inputs.embeddings.as_ref(),
        };
        let picks = acquire(&cfg.acquisition, &ctx, k, cfg.seed.wrapping_add(round as u64))?;

        let mut selected = Vec::with_capacity(k);
        let mut revealed = Vec::with_capacity(k);
        for (rank, p) in picks.iter().enumerate() {
            let e = candidates[p.index];
            let text = inputs.human.get(&e.id).ok_or_else(|| HarnessError::MissingTranslation(e.id.clone()))?;
            selected.push(SelectionRow {
                round,
                rank,
                id: e.id.clone(),
                score: p.score,
                method: cfg.acquisition.name().to_string(),
            });
            revealed.push(ManifestRow::new(e, Origin::Human, round, &cfg.target_language, text));
        }
        let picked: HashSet<usize> = picks.iter().map(|p| remaining[p.index]).collect();
        labeled.extend(picks.iter().map(|p| remaining[p.index]));
        remaining.retain(|i| !picked.contains(i));
        for row in &revealed {
            targets.push(TargetRow { id: row.id.clone(), lf_key: row.lf.clone(), text: row.utterance.clone() });
        }
        manifest.extend(revealed.iter().cloned());
        rounds.push(RoundArtifact {
            round,
            snapshot: snapshot(k, labeled.len(), remaining.len(), &manifest),
            selected,
            revealed,
            manifest: manifest.clone(),
        });
    }
    Ok(rounds)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s.into_bytes()
}

/// Writes `header.json` and one directory per round holding
/// `manifest.jsonl`, `selected.jsonl` and `snapshot.json`.
pub fn persist(cfg: &AlConfig, command: &str, rounds: &[RoundArtifact]) -> Result<(), HarnessError> {
    let dir = &cfg.output_dir;
    write_header(dir, &RunHeader::new(command, cfg.seed, &cfg.config_hash))?;
    for r in rounds {
        let rd = dir.join(format!("round_{:02}", r.round));
        write_atomic(&rd.join("manifest.jsonl"), to_jsonl(&r.manifest).as_bytes())?;
        write_atomic(&rd.join("selected.jsonl"), to_jsonl(&r.selected).as_bytes())?;
        write_atomic(&rd.join("snapshot.json"), &json_bytes(&r.snapshot))?;
    }
    Ok(())
}

/// Active learning for multilingual semantic parsing: the initial training
/// set is the source data alone.
pub fn al_msp_run(cfg: &AlConfig) -> Result<Vec<RoundArtifact>, HarnessError> {
    let rounds = simulate(Mode::Msp, cfg, &RunInputs::load(cfg)?)?;
    persist(cfg, "al-msp", &rounds)?;
    Ok(rounds)
}

/// Human-machine hybrid translation: the initial training set is the source
/// data plus a machine translation of the whole pool, and human
/// translations are added next to the machine rows, never replacing them.
pub fn hat_run(cfg: &AlConfig) -> Result<Vec<RoundArtifact>, HarnessError> {
    let rounds = simulate(Mode::Hat, cfg, &RunInputs::load(cfg)?)?;
    persist(cfg, "hat", &rounds)?;
    Ok(rounds)
}
