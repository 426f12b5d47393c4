use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::acquisition::{AbeCoefficients, BiasVariant, ErrorVariant, LfsParams};

/// Cumulative percentages of the replay with five rounds.
pub const HAT_SCHEDULE: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
/// Cumulative percentages of the replay with six rounds.
pub const MSP_SCHEDULE: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Translate selected source examples; start from the source data only.
    Msp,
    /// Add human translations on top of source data and a full machine
    /// translation of the pool.
    Hat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetPreset {
    Hat,
    Msp,
}

/// Annotation budget per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    /// Cumulative percentages of the pool after each round.
    CumulativePercent(Vec<f64>),
    /// Number of examples selected in each round.
    PerRound(Vec<usize>),
}

impl Budget {
    pub fn preset(preset: BudgetPreset) -> Self {
        match preset {
            BudgetPreset::Hat => Budget::CumulativePercent(HAT_SCHEDULE.to_vec()),
            BudgetPreset::Msp => Budget::CumulativePercent(MSP_SCHEDULE.to_vec()),
        }
    }

    pub fn rounds(&self) -> usize {
        match self {
            Budget::CumulativePercent(p) => p.len(),
            Budget::PerRound(k) => k.len(),
        }
    }

    /// Cumulative selection counts after each round. Percentages round to
    /// the nearest integer with a minimum of one.
    pub fn cumulative(&self, pool: usize) -> Result<Vec<usize>, HarnessError> {
        let cum: Vec<usize> = match self {
            Budget::CumulativePercent(p) => {
                if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x <= 0.0) {
                    return Err(HarnessError::Config(format!("budget percentage {bad} must be positive")));
                }
                p.iter().map(|x| ((x / 100.0 * pool as f64).round() as usize).max(1)).collect()
            }
            Budget::PerRound(k) => k
                .iter()
                .scan(0usize, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect(),
        };
        let mut prev = 0;
        for (q, &c) in cum.iter().enumerate() {
            if c <= prev {
                return Err(HarnessError::Config(format!("round {} has an empty budget", q + 1)));
            }
            prev = c;
        }
        if prev > pool {
            return Err(HarnessError::Config(format!("cumulative budget {prev} exceeds pool size {pool}")));
        }
        Ok(cum)
    }

    /// Selection count of each round.
    pub fn per_round(&self, pool: usize) -> Result<Vec<usize>, HarnessError> {
        let cum = self.cumulative(pool)?;
        Ok(cum.iter().scan(0, |prev, &c| Some(c - std::mem::replace(prev, c))).collect())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::preset(BudgetPreset::Hat)
    }
}

fn default_lfs_alpha() -> f64 {
    LfsParams::GEOQUERY.alpha
}

fn default_lfs_beta() -> f64 {
    LfsParams::GEOQUERY.beta
}

fn default_knn() -> usize {
    10
}

fn default_bandwidth() -> f64 {
    crate::features::DEFAULT_BANDWIDTH
}

/// Acquisition method and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AcquisitionConfig {
    Random,
    MaxCompound,
    LfsLcD {
        #[serde(default = "default_lfs_alpha")]
        alpha: f64,
        #[serde(default = "default_lfs_beta")]
        beta: f64,
    },
    LeastConfidence,
    NbestEntropy,
    LcsBw,
    Traffic,
    Csse {
        #[serde(default = "default_knn")]
        k: usize,
    },
    Abe {
        #[serde(default = "default_bias")]
        bias: BiasVariant,
        #[serde(default = "default_error")]
        error: ErrorVariant,
        #[serde(default)]
        coefficients: AbeCoefficients,
        #[serde(default = "default_knn")]
        density_k: usize,
        #[serde(default = "default_bandwidth")]
        bandwidth: f64,
    },
}

fn default_bias() -> BiasVariant {
    BiasVariant::Factorized
}

fn default_error() -> ErrorVariant {
    ErrorVariant::NBest
}

impl AcquisitionConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AcquisitionConfig::Random => "random",
            AcquisitionConfig::MaxCompound => "max-compound",
            AcquisitionConfig::LfsLcD { .. } => "lfs-lc-d",
            AcquisitionConfig::LeastConfidence => "least-confidence",
            AcquisitionConfig::NbestEntropy => "nbest-entropy",
            AcquisitionConfig::LcsBw => "lcs-bw",
            AcquisitionConfig::Traffic => "traffic",
            AcquisitionConfig::Csse { .. } => "csse",
            AcquisitionConfig::Abe { .. } => "abe",
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        match *self {
            AcquisitionConfig::LfsLcD { alpha, beta } => {
                if !alpha.is_finite() || alpha < 0.0 {
                    return bad(format!("alpha must be non-negative, got {alpha}"));
                }
                if !(0.0..=1.0).contains(&beta) {
                    return bad(format!("beta must lie in [0, 1], got {beta}"));
                }
            }
            AcquisitionConfig::Csse { k: 0 } => return bad("csse k must be positive".into()),
            AcquisitionConfig::Abe { coefficients: c, density_k, bandwidth, .. } => {
                if [c.bias, c.error, c.density, c.diversity].iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return bad("ABE coefficients must be non-negative".into());
                }
                if density_k == 0 || bandwidth.is_nan() || bandwidth <= 0.0 {
                    return bad("ABE density needs k > 0 and a positive bandwidth".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Input files of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    /// Source-language examples forming the selection pool.
    pub pool: PathBuf,
    /// Human translations `{id, text}` revealed on selection.
    pub human_translations: PathBuf,
    /// Machine translations `{id, text}` of the whole pool.
    #[serde(default)]
    pub machine_translations: Option<PathBuf>,
    #[serde(default)]
    pub scores: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetSection {
    preset: Option<BudgetPreset>,
    percent: Option<Vec<f64>>,
    per_round: Option<Vec<usize>>,
}

impl BudgetSection {
    fn resolve(&self) -> Result<Budget, HarnessError> {
        match (self.preset, &self.percent, &self.per_round) {
            (None, None, None) => Ok(Budget::default()),
            (Some(p), None, None) => Ok(Budget::preset(p)),
            (None, Some(p), None) => Ok(Budget::CumulativePercent(p.clone())),
            (None, None, Some(k)) => Ok(Budget::PerRound(k.clone())),
            _ => Err(HarnessError::Config("budget takes exactly one of preset, percent, per_round".into())),
        }
    }
}

fn default_mode() -> Mode {
    Mode::Hat
}

fn default_target_language() -> String {
    "target".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_mode")]
    mode: Mode,
    seed: u64,
    output_dir: PathBuf,
    #[serde(default = "default_target_language")]
    target_language: String,
    data: DataPaths,
    #[serde(default)]
    budget: BudgetSection,
    acquisition: AcquisitionConfig,
}

/// A validated active-learning run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AlConfig {
    pub mode: Mode,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub target_language: String,
    pub data: DataPaths,
    pub budget: Budget,
    pub acquisition: AcquisitionConfig,
    /// SHA-256 of the configuration as written, before path resolution.
    pub config_hash: String,
}

impl AlConfig {
    /// Parses a TOML configuration; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        raw.acquisition.validate()?;
        let budget = raw.budget.resolve()?;
        let canonical = serde_json::to_string(&raw).expect("serializable config");
        let config_hash = super::config_hash(&canonical);
        let at = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let data = DataPaths {
            pool: at(&raw.data.pool),
            human_translations: at(&raw.data.human_translations),
            machine_translations: raw.data.machine_translations.as_deref().map(at),
            scores: raw.data.scores.as_deref().map(at),
            embeddings: raw.data.embeddings.as_deref().map(at),
        };
        Ok(AlConfig {
            mode: raw.mode,
            seed: raw.seed,
            output_dir: at(&raw.output_dir),
            target_language: raw.target_language,
            data,
            budget,
            acquisition: raw.acquisition,
            config_hash,
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }
}
