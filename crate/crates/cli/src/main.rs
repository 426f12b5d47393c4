use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use semkit::acquisition::{read_score_table, AbeCoefficients, BiasVariant, ErrorVariant, LfsParams, SelectionRow};
use semkit::dataset::{examples_to_jsonl, read_examples, read_jsonl, to_jsonl, write_atomic, Example};
use semkit::features::{read_embeddings, Embeddings};
use semkit::harness::{
    acquire, alignment_priors, config_hash, paraphrase_filter, persist, retention_table, simulate, tuning_grid,
    write_grid, write_header_at, AcquisitionConfig, AlConfig, HarnessError, ManifestRow, MatchMode, Mode,
    Origin, ParaphraseRow, RunHeader, RunInputs, SelectionContext, TargetRow, ALPHA_GRID, BETA_GRID,
};
use semkit::lf::{anonymize, normalize_templates, LfNode, LogicalForm, Template, TypingRules};
use semkit::memory::{
    balance_sample, dlfs_sample, fss_sample, lfs_sample, memory_entropy, prior_sample, random_sample, DlfsOptions,
    MemoryBuffer,
};
use semkit::metrics::{
    bleu_n, component_f1, exact_match, js_divergence, mtld, self_bleu, set_match, tokenize, ttr, NgramProfile,
    PredictionRow, SqlClauses,
};
use semkit::scfg::{
    bind_variables, derive_exhaustive, derive_sample, uat_subsample, BindMode, ScfgGrammar, DEFAULT_MAX_DEPTH,
    MARITIME_GRAMMAR,
};

#[derive(Parser)]
#[command(name = "semkit", version, about = "Data-side toolkit for low-resource semantic parsing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive utterance/LF pairs from a synchronous grammar.
    Generate(GenerateArgs),
    /// Anonymize LFs into templates and collapse idioms.
    Normalize(NormalizeArgs),
    /// Select pool examples with an acquisition function.
    Select(SelectArgs),
    /// Fill a replay memory from a training set.
    SampleMemory(SampleMemoryArgs),
    /// Score predictions or corpus diversity.
    Evaluate(EvaluateArgs),
    /// Replay an active-learning schedule from a configuration file.
    Simulate(SimulateArgs),
    /// Keep paraphrases whose parse matches their target.
    FilterParaphrases(FilterArgs),
    /// Word priors per parse action.
    AlignPriors(PriorsArgs),
}

enum Failure {
    Usage(String),
    Data(String),
}

fn data<E: Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

/// Writes `rows` to `out` and a reproducibility header next to it.
fn emit<T: Serialize, A: Serialize>(out: &Path, rows: &[T], command: &str, seed: u64, args: &A) -> Outcome {
    write_atomic(out, to_jsonl(rows).as_bytes()).map_err(data)?;
    write_side_header(out, command, seed, args)
}

fn write_side_header<A: Serialize>(out: &Path, command: &str, seed: u64, args: &A) -> Outcome {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".header.json");
    let canonical = serde_json::to_string(args).expect("serializable arguments");
    write_header_at(&out.with_file_name(name), &RunHeader::new(command, seed, &config_hash(&canonical)))?;
    Ok(())
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    match out {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(data),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_typing(path: Option<&Path>) -> Result<TypingRules, Failure> {
    match path {
        None => Ok(TypingRules::quoted_values()),
        Some(p) => TypingRules::parse(&std::fs::read_to_string(p).map_err(|e| data(format!("{}: {e}", p.display())))?)
            .map_err(data),
    }
}

// ---------------------------------------------------------------- generate

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BindArg {
    /// Keep variables as they are.
    Abstract,
    /// Every combination of lexicon entries.
    All,
    /// `--bind-k` combinations per pair.
    Sample,
}

#[derive(Args, Serialize)]
struct GenerateArgs {
    /// Grammar file; the built-in maritime grammar when omitted.
    #[arg(long)]
    grammar: Option<PathBuf>,
    /// Enumerate every derivation instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    /// Number of sampled derivations.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Stop after this many pairs.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    #[arg(long, value_enum, default_value_t = BindArg::Abstract)]
    bind: BindArg,
    #[arg(long, default_value_t = 1)]
    bind_k: usize,
    /// Keep a template-diverse subsample of this size.
    #[arg(long)]
    uat: Option<usize>,
    #[arg(long, default_value = "gen")]
    prefix: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn generate(a: &GenerateArgs) -> Outcome {
    let grammar = match &a.grammar {
        Some(p) => ScfgGrammar::load(p).map_err(data)?,
        None => ScfgGrammar::parse(MARITIME_GRAMMAR).map_err(data)?,
    };
    if a.max_depth == 0 {
        return Err(usage("--max-depth must be positive"));
    }
    let pairs: Vec<_> = if a.exhaustive {
        let it = derive_exhaustive(&grammar, a.max_depth).map_err(data)?.pairs();
        it.take(a.limit.unwrap_or(usize::MAX)).collect::<Result<_, _>>().map_err(data)?
    } else {
        let ds = derive_sample(&grammar, a.n, a.max_depth, a.seed).map_err(data)?;
        ds.iter().take(a.limit.unwrap_or(usize::MAX)).map(|d| d.to_pair(&grammar)).collect::<Result<_, _>>().map_err(data)?
    };
    let mode = match a.bind {
        BindArg::Abstract => BindMode::AbstractOnly,
        BindArg::All => BindMode::All,
        BindArg::Sample => BindMode::Sample { k: a.bind_k, seed: a.seed },
    };
    let mut examples = Vec::new();
    for pair in &pairs {
        for bound in bind_variables(pair, &grammar, mode).map_err(data)? {
            let id = format!("{}-{:06}", a.prefix, examples.len());
            examples.push(Example::new(id, &bound.utterance.join(" "), bound.lf));
        }
    }
    if let Some(k) = a.uat {
        let keep = uat_subsample(&examples, k, a.seed, &TypingRules::quoted_values());
        examples = keep.into_iter().map(|i| examples[i].clone()).collect();
    }
    write_atomic(&a.out, examples_to_jsonl(&examples).as_bytes()).map_err(data)?;
    write_side_header(&a.out, "generate", a.seed, a)?;
    eprintln!("wrote {} examples", examples.len());
    Ok(())
}

// --------------------------------------------------------------- normalize

#[derive(Args, Serialize)]
struct NormalizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Typing rules, one `PATTERN TYPE [SLOT]` per line; quoted values by default.
    #[arg(long)]
    typing: Option<PathBuf>,
    #[arg(long, default_value_t = semkit::lf::DEFAULT_MIN_SUPPORT)]
    min_support: usize,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the idiom dictionary.
    #[arg(long)]
    idioms: Option<PathBuf>,
}

#[derive(Serialize)]
struct TemplateRow {
    id: String,
    template: String,
    slots: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct IdiomRow {
    head: String,
    /// Fixed argument subtrees; `null` marks an argument position.
    slots: Vec<Option<String>>,
}

fn normalize(a: &NormalizeArgs) -> Outcome {
    if a.min_support < 2 {
        return Err(usage("--min-support must be at least 2"));
    }
    let typing = load_typing(a.typing.as_deref())?;
    let examples = read_examples(&a.input).map_err(data)?;
    let templates: Vec<Template> = examples.iter().map(|e| anonymize(&e.lf, &typing)).collect();
    let (normalized, dict) = normalize_templates(&templates, a.min_support);
    let rows: Vec<TemplateRow> = examples
        .iter()
        .zip(&normalized)
        .map(|(e, t)| TemplateRow { id: e.id.clone(), template: t.key(), slots: t.slot_types.clone() })
        .collect();
    emit(&a.out, &rows, "normalize", 0, a)?;
    if let Some(p) = &a.idioms {
        let sexpr = |n: &LfNode| LogicalForm::new(n.clone()).to_sexpr();
        let units: BTreeMap<&String, IdiomRow> = dict
            .units
            .iter()
            .map(|(name, p)| (name, IdiomRow { head: p.head.clone(), slots: p.slots.iter().map(|s| s.as_ref().map(sexpr)).collect() }))
            .collect();
        write_json(Some(p), &units)?;
    }
    Ok(())
}

// ------------------------------------------------------------------ select

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Random,
    MaxCompound,
    LfsLcD,
    LeastConfidence,
    NbestEntropy,
    LcsBw,
    Traffic,
    Csse,
    Abe,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PresetArg {
    Geoquery,
    Nlmap,
}

#[derive(Args, Serialize)]
struct SelectArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Number of examples to select.
    #[arg(long)]
    k: usize,
    /// Unlabeled candidates.
    #[arg(long)]
    pool: PathBuf,
    /// Already labeled examples.
    #[arg(long)]
    labeled: Option<PathBuf>,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Training manifest whose machine and human rows feed ABE.
    #[arg(long)]
    train_manifest: Option<PathBuf>,
    /// LFS-LC-D weights; `--alpha`/`--beta` override the preset.
    #[arg(long, value_enum, default_value_t = PresetArg::Geoquery)]
    preset: PresetArg,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Neighbours for density estimates.
    #[arg(long, default_value_t = 10)]
    knn: usize,
    /// Run LFS-LC-D over the tuning grid and write one directory per cell to `--out`.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn select(a: &SelectArgs) -> Outcome {
    let pool = read_examples(&a.pool).map_err(data)?;
    let labeled = match &a.labeled {
        Some(p) => read_examples(p).map_err(data)?,
        None => Vec::new(),
    };
    if a.grid {
        if !matches!(a.method, MethodArg::LfsLcD) {
            return Err(usage("--grid only applies to --method lfs-lc-d"));
        }
        let cells = tuning_grid(&pool, &labeled, a.k, a.seed, &ALPHA_GRID, &BETA_GRID)?;
        let canonical = serde_json::to_string(a).expect("serializable arguments");
        write_grid(&a.out, &cells, a.seed, &config_hash(&canonical))?;
        return Ok(());
    }
    let preset = match a.preset {
        PresetArg::Geoquery => LfsParams::GEOQUERY,
        PresetArg::Nlmap => LfsParams::NLMAP,
    };
    let cfg = match a.method {
        MethodArg::Random => AcquisitionConfig::Random,
        MethodArg::MaxCompound => AcquisitionConfig::MaxCompound,
        MethodArg::LfsLcD => AcquisitionConfig::LfsLcD {
            alpha: a.alpha.unwrap_or(preset.alpha),
            beta: a.beta.unwrap_or(preset.beta),
        },
        MethodArg::LeastConfidence => AcquisitionConfig::LeastConfidence,
        MethodArg::NbestEntropy => AcquisitionConfig::NbestEntropy,
        MethodArg::LcsBw => AcquisitionConfig::LcsBw,
        MethodArg::Traffic => AcquisitionConfig::Traffic,
        MethodArg::Csse => AcquisitionConfig::Csse { k: a.knn },
        MethodArg::Abe => AcquisitionConfig::Abe {
            bias: BiasVariant::Factorized,
            error: ErrorVariant::NBest,
            coefficients: AbeCoefficients::default(),
            density_k: a.knn,
            bandwidth: semkit::features::DEFAULT_BANDWIDTH,
        },
    };
    cfg.validate()?;
    if a.k > pool.len() {
        return Err(usage(format!("--k {} exceeds the pool size {}", a.k, pool.len())));
    }
    let scores = a.scores.as_deref().map(read_score_table).transpose().map_err(data)?;
    let embeddings: Option<Embeddings> = a.embeddings.as_deref().map(read_embeddings).transpose().map_err(data)?;
    let targets: Vec<TargetRow> = match &a.train_manifest {
        Some(p) => read_jsonl::<ManifestRow>(p)
            .map_err(data)?
            .into_iter()
            .filter(|r| r.origin != Origin::Source)
            .map(|r| TargetRow { id: r.id, lf_key: LogicalForm::parse(&r.lf).map(|lf| lf.to_sexpr()).unwrap_or(r.lf), text: r.utterance })
            .collect(),
        None => Vec::new(),
    };
    let candidates: Vec<&Example> = pool.iter().collect();
    let labeled_refs: Vec<&Example> = labeled.iter().collect();
    let source: Vec<Example> = labeled.iter().chain(&pool).cloned().collect();
    let ctx = SelectionContext {
        pool: &candidates,
        labeled: &labeled_refs,
        source: &source,
        targets: &targets,
        scores: scores.as_ref(),
        embeddings: embeddings.as_ref(),
    };
    let picks = acquire(&cfg, &ctx, a.k, a.seed)?;
    let rows: Vec<SelectionRow> = picks
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
    emit(&a.out, &rows, "select", a.seed, a)
}

// ----------------------------------------------------------- sample-memory

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MemoryMethodArg {
    Dlfs,
    Random,
    Fss,
    Lfs,
    Balance,
    Prior,
}

#[derive(Args, Serialize)]
struct SampleMemoryArgs {
    #[arg(long, value_enum, default_value_t = MemoryMethodArg::Dlfs)]
    method: MemoryMethodArg,
    /// Memory size.
    #[arg(long)]
    m: usize,
    /// Training set of the task.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "task")]
    task: String,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Restrict the DLFS entropy to this many actions.
    #[arg(long)]
    action_subset: Option<usize>,
    #[arg(long)]
    typing: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn sample_memory(a: &SampleMemoryArgs) -> Outcome {
    let examples = read_examples(&a.input).map_err(data)?;
    if a.m == 0 || a.m > examples.len() {
        return Err(usage(format!("--m must lie in 1..={}", examples.len())));
    }
    let actions: Vec<Vec<String>> = examples.iter().map(|e| e.lf.actions()).collect();
    let ids: Vec<String> = examples.iter().map(|e| e.id.clone()).collect();
    let opts = DlfsOptions { action_subset: a.action_subset, typing: load_typing(a.typing.as_deref())?, ..Default::default() };
    let (buffer, scope): (MemoryBuffer, _) = match a.method {
        MemoryMethodArg::Dlfs => {
            let r = dlfs_sample(&examples, a.m, a.seed, &opts).map_err(data)?;
            (r.buffer, r.scope)
        }
        MemoryMethodArg::Random => (random_sample(&actions, a.m, a.seed).map_err(data)?, None),
        MemoryMethodArg::Fss => {
            let path = a.embeddings.as_deref().ok_or_else(|| usage("fss needs --embeddings"))?;
            let emb = read_embeddings(path).map_err(data)?;
            let vectors: Vec<Vec<f64>> = ids
                .iter()
                .map(|id| emb.get(id).map(<[f64]>::to_vec).ok_or_else(|| data(format!("no embedding for {id:?}"))))
                .collect::<Result<_, _>>()?;
            (fss_sample(&actions, &vectors, a.m, a.seed).map_err(data)?, None)
        }
        MemoryMethodArg::Lfs => (lfs_sample(&examples, a.m, a.seed, &opts).map_err(data)?, None),
        MemoryMethodArg::Balance => (balance_sample(&actions, a.m).map_err(data)?, None),
        MemoryMethodArg::Prior => {
            let path = a.scores.as_deref().ok_or_else(|| usage("prior needs --scores"))?;
            let scores = read_score_table(path).map_err(data)?;
            (prior_sample(&actions, &ids, &scores, a.m).map_err(data)?, None)
        }
    };
    let entropy = memory_entropy(&buffer, scope.as_ref()).map_err(data)?;
    emit(&a.out, &buffer.rows(&a.task, &ids), "sample-memory", a.seed, a)?;
    println!("{}", serde_json::json!({ "entropy": entropy, "size": buffer.len() }));
    Ok(())
}

// ---------------------------------------------------------------- evaluate

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MetricArg {
    Exact,
    Set,
    ComponentF1,
    Bleu,
    SelfBleu,
    Mtld,
    Ttr,
    Js,
}

#[derive(Args, Serialize)]
struct EvaluateArgs {
    #[arg(long, value_enum)]
    metric: MetricArg,
    /// Gold targets, JSON lines `{id, target}`.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Predictions, JSON lines `{id, pred}`.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Examples whose utterances form the corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Second corpus for `js`.
    #[arg(long)]
    other: Option<PathBuf>,
    /// N-gram order.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct GoldRow {
    id: String,
    target: String,
}

fn aligned(a: &EvaluateArgs) -> Result<(Vec<String>, Vec<String>), Failure> {
    let gold_path = a.gold.as_deref().ok_or_else(|| usage("this metric needs --gold"))?;
    let pred_path = a.pred.as_deref().ok_or_else(|| usage("this metric needs --pred"))?;
    let golds: Vec<GoldRow> = read_jsonl(gold_path).map_err(data)?;
    let preds: BTreeMap<String, String> =
        read_jsonl::<PredictionRow>(pred_path).map_err(data)?.into_iter().map(|p| (p.id, p.pred)).collect();
    let mut p = Vec::with_capacity(golds.len());
    for g in &golds {
        p.push(preds.get(&g.id).cloned().ok_or_else(|| data(format!("no prediction for {:?}", g.id)))?);
    }
    Ok((p, golds.into_iter().map(|g| g.target).collect()))
}

fn utterances(path: Option<&Path>, flag: &str) -> Result<Vec<Vec<String>>, Failure> {
    let p = path.ok_or_else(|| usage(format!("this metric needs {flag}")))?;
    Ok(read_examples(p).map_err(data)?.into_iter().map(|e| e.utterance).collect())
}

fn evaluate(a: &EvaluateArgs) -> Outcome {
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let report = match a.metric {
        MetricArg::Exact | MetricArg::Set => {
            let (preds, golds) = aligned(a)?;
            let mut hits = 0usize;
            for (p, g) in preds.iter().zip(&golds) {
                let ok = if matches!(a.metric, MetricArg::Exact) {
                    exact_match(p, g)
                } else {
                    SqlClauses::parse(g).map_err(data)?;
                    set_match(p, g).unwrap_or(false)
                };
                hits += usize::from(ok);
            }
            let accuracy = if golds.is_empty() { 0.0 } else { 100.0 * hits as f64 / golds.len() as f64 };
            serde_json::json!({ "accuracy": accuracy, "correct": hits, "count": golds.len() })
        }
        MetricArg::ComponentF1 => {
            let (preds, golds) = aligned(a)?;
            serde_json::to_value(component_f1(&preds, &golds).map_err(data)?).expect("serializable report")
        }
        MetricArg::Bleu => {
            let (preds, golds) = aligned(a)?;
            let scores: Vec<f64> = preds.iter().zip(&golds).map(|(p, g)| bleu_n(&tokenize(p), &[tokenize(g)], a.n)).collect();
            let mean = if scores.is_empty() { 0.0 } else { scores.iter().sum::<f64>() / scores.len() as f64 };
            serde_json::json!({ "bleu": mean, "n": a.n, "count": scores.len() })
        }
        MetricArg::SelfBleu => {
            let corpus = utterances(a.corpus.as_deref(), "--corpus")?;
            serde_json::json!({ "self_bleu": self_bleu(&corpus, a.n).map_err(data)?, "n": a.n })
        }
        MetricArg::Mtld | MetricArg::Ttr => {
            let tokens: Vec<String> = utterances(a.corpus.as_deref(), "--corpus")?.into_iter().flatten().collect();
            if matches!(a.metric, MetricArg::Mtld) {
                serde_json::json!({ "mtld": mtld(&tokens).map_err(data)? })
            } else {
                serde_json::json!({ "ttr": ttr(&tokens).map_err(data)? })
            }
        }
        MetricArg::Js => {
            let p = NgramProfile::from_corpus(&utterances(a.corpus.as_deref(), "--corpus")?, a.n).map_err(data)?;
            let q = NgramProfile::from_corpus(&utterances(a.other.as_deref(), "--other")?, a.n).map_err(data)?;
            serde_json::json!({ "js_divergence": js_divergence(&p, &q).map_err(data)?, "n": a.n })
        }
    };
    write_json(a.out.as_deref(), &report)
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Msp,
    Hat,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

fn simulate_cmd(a: &SimulateArgs) -> Outcome {
    let mut cfg = AlConfig::load(&a.config)?;
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::Msp => Mode::Msp,
            ModeArg::Hat => Mode::Hat,
        };
    }
    let inputs = RunInputs::load(&cfg)?;
    let rounds = simulate(cfg.mode, &cfg, &inputs)?;
    let command = match cfg.mode {
        Mode::Msp => "simulate --mode msp",
        Mode::Hat => "simulate --mode hat",
    };
    persist(&cfg, command, &rounds)?;
    for r in &rounds {
        println!("{}", serde_json::json!({ "round": r.round, "snapshot": r.snapshot }));
    }
    Ok(())
}

// ------------------------------------------------------- filter-paraphrases

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MatchArg {
    Exact,
    Set,
}

#[derive(Args, Serialize)]
struct FilterArgs {
    /// JSON lines `{id, round?, utterance, target}`.
    #[arg(long)]
    paraphrases: PathBuf,
    /// JSON lines `{id, pred}`.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long = "match", value_enum, default_value_t = MatchArg::Set)]
    match_mode: MatchArg,
    /// Kept paraphrases.
    #[arg(long)]
    out: PathBuf,
}

fn filter_paraphrases(a: &FilterArgs) -> Outcome {
    let rows: Vec<ParaphraseRow> = read_jsonl(&a.paraphrases).map_err(data)?;
    let preds: Vec<PredictionRow> = read_jsonl(&a.predictions).map_err(data)?;
    let mode = match a.match_mode {
        MatchArg::Exact => MatchMode::Exact,
        MatchArg::Set => MatchMode::Set,
    };
    let outcome = paraphrase_filter(&rows, &preds, mode)?;
    let kept: std::collections::HashSet<&str> = outcome.kept.iter().map(String::as_str).collect();
    let kept_rows: Vec<&ParaphraseRow> = rows.iter().filter(|r| kept.contains(r.id.as_str())).collect();
    emit(&a.out, &kept_rows, "filter-paraphrases", 0, a)?;
    print!("{}", retention_table(&outcome.retention));
    Ok(())
}

// ------------------------------------------------------------ align-priors

#[derive(Args, Serialize)]
struct PriorsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Weight of co-occurrence against character similarity.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long)]
    out: PathBuf,
}

fn align_priors(a: &PriorsArgs) -> Outcome {
    if !(0.0..=1.0).contains(&a.gamma) {
        return Err(usage("--gamma must lie in [0, 1]"));
    }
    let examples = read_examples(&a.input).map_err(data)?;
    let priors = alignment_priors(&examples, a.gamma)?;
    write_json(Some(&a.out), &priors.rows)?;
    write_side_header(&a.out, "align-priors", 0, a)
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Normalize(a) => normalize(a),
        Command::Select(a) => select(a),
        Command::SampleMemory(a) => sample_memory(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::FilterParaphrases(a) => filter_paraphrases(a),
        Command::AlignPriors(a) => align_priors(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
