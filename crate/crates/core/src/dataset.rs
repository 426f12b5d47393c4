//! Dataset rows and JSON-lines I/O.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lf::{LfError, LogicalForm};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: String, line: usize, source: serde_json::Error },
    #[error("{path}:{line}: invalid logical form: {source}")]
    Lf { path: String, line: usize, source: LfError },
    #[error("duplicate example id {0:?}")]
    DuplicateId(String),
}

/// One utterance/logical-form pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub utterance: Vec<String>,
    pub lf: LogicalForm,
    pub language: String,
    pub task: Option<String>,
    pub meta: BTreeMap<String, String>,
}

/// Serialized form of an [`Example`]: the utterance is a space-joined string
/// and the logical form its canonical serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub id: String,
    pub utterance: String,
    pub lf: String,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

fn default_language() -> String {
    "en".to_string()
}

impl Example {
    pub fn new(id: impl Into<String>, utterance: &str, lf: LogicalForm) -> Self {
        Example {
            id: id.into(),
            utterance: utterance.split_whitespace().map(str::to_string).collect(),
            lf,
            language: default_language(),
            task: None,
            meta: BTreeMap::new(),
        }
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    pub fn utterance_text(&self) -> String {
        self.utterance.join(" ")
    }

    pub fn to_record(&self) -> ExampleRecord {
        ExampleRecord {
            id: self.id.clone(),
            utterance: self.utterance_text(),
            lf: self.lf.to_sexpr(),
            language: self.language.clone(),
            task: self.task.clone(),
            meta: self.meta.clone(),
        }
    }

    pub fn from_record(record: ExampleRecord) -> Result<Self, LfError> {
        Ok(Example {
            lf: LogicalForm::parse(&record.lf)?,
            utterance: record.utterance.split_whitespace().map(str::to_string).collect(),
            id: record.id,
            language: record.language,
            task: record.task,
            meta: record.meta,
        })
    }
}

/// Reads a JSON-lines file; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| DatasetError::Io { path: name.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| DatasetError::Io { path: name.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line)
            .map_err(|source| DatasetError::Json { path: name.clone(), line: i + 1, source })?;
        out.push(value);
    }
    Ok(out)
}

pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("serializable row"));
        out.push('\n');
    }
    out
}

/// Reads a dataset and checks id uniqueness.
pub fn read_examples(path: &Path) -> Result<Vec<Example>, DatasetError> {
    let name = path.display().to_string();
    let records: Vec<ExampleRecord> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (i, record) in records.into_iter().enumerate() {
        if !seen.insert(record.id.clone()) {
            return Err(DatasetError::DuplicateId(record.id));
        }
        let example = Example::from_record(record)
            .map_err(|source| DatasetError::Lf { path: name.clone(), line: i + 1, source })?;
        out.push(example);
    }
    Ok(out)
}

pub fn examples_to_jsonl(examples: &[Example]) -> String {
    let records: Vec<ExampleRecord> = examples.iter().map(Example::to_record).collect();
    to_jsonl(&records)
}

pub fn write_examples(path: &Path, examples: &[Example]) -> Result<(), DatasetError> {
    write_atomic(path, examples_to_jsonl(examples).as_bytes())
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    let name = path.display().to_string();
    let io = |source| DatasetError::Io { path: name.clone(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
