//! Argument parsing and command execution for the `reformcause` binary.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use reformcause::classifier::{self, LinearModel, SolverParams, TrainingSet, DEFAULT_GRID};
use reformcause::corpus::{self, CauseLabel, Corpus, FilterParams};
use reformcause::eval::{self, AblationReport, EvalConfig, EvalReport, PROPOSED_ROW};
use reformcause::features::{self, Family, FeatureSpace, FeatureSpaceConfig, FeatureVector, Standardizer};
use reformcause::{report, seeds, synth};

pub const JOBS_ENV: &str = "REFORMCAUSE_JOBS";

#[derive(Debug, Parser)]
#[command(name = "reformcause", version, about = "Reformulation cause prediction pipeline")]
pub struct Cli {
    /// Worker threads for cross-validation folds. Results do not depend on
    /// it. REFORMCAUSE_JOBS takes precedence when set.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic corpus.
    Synth(SynthArgs),
    /// Keep exchanges that look like reformulations.
    Filter(FilterArgs),
    /// Write raw feature vectors as JSONL.
    Featurize(FeaturizeArgs),
    /// Train a model on a whole labeled corpus.
    Train(TrainArgs),
    /// Cross-validate one feature configuration.
    Eval(EvalArgs),
    /// Compare a baseline against added feature families.
    Ablate(AblateArgs),
    /// Show median feature weights.
    Weights(WeightsArgs),
    /// Predict causes for a corpus with a trained model.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Defaults to the config file's seed, or 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with a full synth configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1800.0)]
    pub max_interval_s: f64,
    #[arg(long, default_value_t = 0.5)]
    pub max_dist: f64,
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Feature-space JSON (intents, dialog-act lexicon, families).
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Comma-separated families, overriding the space file.
    #[arg(long)]
    pub families: Option<String>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Fixed regularization constant; skips the search.
    #[arg(long, conflicts_with = "grid")]
    pub c: Option<f64>,
    /// Comma-separated candidate values of C.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub model_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// JSON report path; a text rendering is written next to it.
    #[arg(long)]
    pub report_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value = "session,reformulation")]
    pub base_families: String,
    /// Comma-separated addons; join families with `+` to add them together.
    #[arg(long, default_value = "asr,nlu,lg")]
    pub addons: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub report_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Eval or ablation report JSON.
    #[arg(long, required_unless_present = "models", conflicts_with = "models")]
    pub report: Option<PathBuf>,
    /// Model files written by `train`.
    #[arg(long, num_args = 1..)]
    pub models: Vec<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub top: usize,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or paths; exit code 2.
    Usage(String),
    /// Failure inside the pipeline; exit code 1.
    Pipeline(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Pipeline(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Pipeline(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        Self::Pipeline(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `argv` (including the program name). Help and version requests
/// come back as `Err(clap::Error)` with exit code 0.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

/// Model file: the linear model plus what is needed to featurize new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub model: LinearModel,
    pub standardizer: Standardizer,
    pub space: FeatureSpaceConfig,
}

#[derive(Serialize)]
struct FeatureRow<'a> {
    id: &'a str,
    label: Option<CauseLabel>,
    features: &'a FeatureVector,
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    id: &'a str,
    predicted_label: CauseLabel,
    scores: BTreeMap<&'static str, f64>,
}

fn require_file(path: &Path, flag: &str) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(usage(format!("{flag} {}: no such file", path.display())));
    }
    Ok(())
}

fn require_out(path: &Path, flag: &str, inputs: &[&Path]) -> Result<(), CliError> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(usage(format!(
            "{flag} {}: directory {} does not exist",
            path.display(),
            parent.display()
        )));
    }
    if path.is_dir() {
        return Err(usage(format!("{flag} {}: is a directory", path.display())));
    }
    for input in inputs {
        if same_file(path, input) {
            return Err(usage(format!(
                "{flag} {} would overwrite an input file",
                path.display()
            )));
        }
    }
    Ok(())
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn text_path(report: &Path) -> PathBuf {
    if report.extension().is_some_and(|e| e == "json") {
        report.with_extension("txt")
    } else {
        let mut s = report.as_os_str().to_owned();
        s.push(".txt");
        PathBuf::from(s)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn load(path: &Path) -> anyhow::Result<Corpus> {
    corpus::load_corpus(path).with_context(|| "corpus")
}

fn parse_grid(grid: Option<&str>) -> Result<Vec<f64>, CliError> {
    let Some(grid) = grid else {
        return Ok(DEFAULT_GRID.to_vec());
    };
    let values: Vec<f64> = grid
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--grid: {s:?} is not a number")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() || values.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(usage("--grid values must be positive"));
    }
    Ok(values)
}

fn families_arg(list: &str, flag: &str) -> Result<BTreeSet<Family>, CliError> {
    let set = features::parse_families(list).map_err(|e| usage(format!("{flag}: {e}")))?;
    if set.is_empty() {
        return Err(usage(format!("{flag}: no families given")));
    }
    Ok(set)
}

fn space_config(args: &SpaceArgs) -> Result<FeatureSpaceConfig, CliError> {
    space_config_from(args.space.as_deref(), args.families.as_deref())
}

fn space_config_from(path: Option<&Path>, families: Option<&str>) -> Result<FeatureSpaceConfig, CliError> {
    let mut cfg = match path {
        Some(p) => read_json::<FeatureSpaceConfig>(p).context("feature space")?,
        None => FeatureSpaceConfig::default(),
    };
    if let Some(list) = families {
        cfg = cfg.with_families(families_arg(list, "--families")?);
    }
    Ok(cfg)
}

fn effective_jobs(flag: usize) -> Result<usize, CliError> {
    match std::env::var(JOBS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&j| j > 0)
            .ok_or_else(|| usage(format!("{JOBS_ENV}={v:?} is not a positive integer"))),
        Err(_) if flag == 0 => Err(usage("--jobs must be at least 1")),
        Err(_) => Ok(flag),
    }
}

/// Runs a parsed command and returns its one-line summary.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    let jobs = effective_jobs(cli.jobs)?;
    match cli.command {
        Command::Synth(a) => synth_cmd(a),
        Command::Filter(a) => filter_cmd(a),
        Command::Featurize(a) => featurize_cmd(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a, jobs),
        Command::Ablate(a) => ablate_cmd(a, jobs),
        Command::Weights(a) => weights_cmd(a),
        Command::Predict(a) => predict_cmd(a),
    }
}

/// Parses, executes and reports; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("reformcause: {e}");
            e.exit_code()
        }
    }
}

fn synth_cmd(a: SynthArgs) -> Result<String, CliError> {
    if let Some(p) = &a.config {
        require_file(p, "--config")?;
    }
    require_out(&a.out, "--out", &[])?;
    let mut config = match &a.config {
        Some(p) => read_json::<synth::SynthConfig>(p).context("synth config")?,
        None => synth::default_config(),
    };
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let corpus = synth::generate_corpus(&config).context("synth")?;
    write_atomic(&a.out, corpus.to_jsonl().as_bytes())?;
    Ok(format!(
        "synth: wrote {} records (seed {}) to {}",
        corpus.len(),
        config.seed,
        a.out.display()
    ))
}

fn filter_cmd(a: FilterArgs) -> Result<String, CliError> {
    require_file(&a.input, "--in")?;
    require_out(&a.out, "--out", &[&a.input])?;
    if !(a.max_dist.is_finite() && (0.0..=1.0).contains(&a.max_dist)) {
        return Err(usage("--max-dist must be within [0, 1]"));
    }
    if !(a.max_interval_s.is_finite() && a.max_interval_s >= 0.0) {
        return Err(usage("--max-interval-s must be non-negative"));
    }
    let params = FilterParams {
        max_interval_s: a.max_interval_s,
        max_dist: a.max_dist,
        ..FilterParams::default()
    };
    let input = load(&a.input)?;
    let kept = corpus::filter_pairs(&input, &params);
    write_atomic(&a.out, kept.to_jsonl().as_bytes())?;
    Ok(format!(
        "filter: kept {} of {} records -> {}",
        kept.len(),
        input.len(),
        a.out.display()
    ))
}

fn featurize_cmd(a: FeaturizeArgs) -> Result<String, CliError> {
    require_file(&a.corpus, "--corpus")?;
    if let Some(p) = &a.space.space {
        require_file(p, "--space")?;
    }
    require_out(&a.out, "--out", &[&a.corpus])?;
    let names_path = PathBuf::from(format!("{}.names.json", a.out.display()));
    require_out(&names_path, "--out", &[&a.corpus])?;
    let cfg = space_config(&a.space)?;
    let space = FeatureSpace::build(&cfg).context("feature space")?;
    let corpus = load(&a.corpus)?;
    let mut out = Vec::new();
    for r in &corpus.records {
        let v = features::extract_features(r, &space).context("featurize")?;
        let row = FeatureRow {
            id: &r.id,
            label: r.gold_label,
            features: &v,
        };
        serde_json::to_writer(&mut out, &row).context("featurize")?;
        out.push(b'\n');
    }
    write_atomic(&a.out, &out)?;
    let names = serde_json::json!({ "feature_names": space.names() });
    write_atomic(&names_path, &to_json(&names)?)?;
    Ok(format!(
        "featurize: {} records x {} features -> {} (names: {})",
        corpus.len(),
        space.len(),
        a.out.display(),
        names_path.display()
    ))
}

fn train_cmd(a: TrainArgs) -> Result<String, CliError> {
    require_file(&a.corpus, "--corpus")?;
    if let Some(p) = &a.space.space {
        require_file(p, "--space")?;
    }
    require_out(&a.model_out, "--model-out", &[&a.corpus])?;
    if let Some(c) = a.c {
        if !(c.is_finite() && c > 0.0) {
            return Err(usage("--c must be positive"));
        }
    }
    let grid = parse_grid(a.grid.as_deref())?;
    let cfg = space_config(&a.space)?;
    let space = FeatureSpace::build(&cfg).context("feature space")?;
    let corpus = corpus::restrict_to_task_labels(&load(&a.corpus)?).context("corpus")?;
    let vectors: Vec<FeatureVector> = corpus
        .records
        .iter()
        .map(|r| features::extract_features(r, &space))
        .collect::<Result<_, _>>()
        .context("features")?;
    let standardizer = Standardizer::fit(&vectors, &space).context("features")?;
    let labels = corpus.gold_labels().context("corpus")?;
    let data = TrainingSet::new(standardizer.apply_all(&vectors).context("features")?, labels).context("classifier")?;
    let names = space.names();
    let base = SolverParams {
        seed: seeds::derive(a.seed, "inner", 0),
        ..SolverParams::default()
    };
    let c = match a.c {
        Some(c) => c,
        None => {
            classifier::select_hyperparameters(&data, &names, &grid, &base)
                .context("classifier")?
                .best_c
        }
    };
    let params = SolverParams {
        c,
        seed: seeds::derive(a.seed, "solver", 0),
        ..SolverParams::default()
    };
    let model = classifier::train_multiclass_with(&data, &names, &params, 1).context("classifier")?;
    let file = ModelFile {
        model,
        standardizer,
        space: cfg,
    };
    write_atomic(&a.model_out, &to_json(&file)?)?;
    Ok(format!(
        "train: {} records, {} features, C={} -> {}",
        data.len(),
        names.len(),
        c,
        a.model_out.display()
    ))
}

fn eval_cmd(a: EvalArgs, jobs: usize) -> Result<String, CliError> {
    require_file(&a.corpus, "--corpus")?;
    if let Some(p) = &a.space.space {
        require_file(p, "--space")?;
    }
    let text_out = text_path(&a.report_out);
    require_out(&a.report_out, "--report-out", &[&a.corpus])?;
    require_out(&text_out, "--report-out", &[&a.corpus])?;
    if a.k < 2 {
        return Err(usage("--k must be at least 2"));
    }
    let config = EvalConfig {
        space: space_config(&a.space)?,
        k: a.k,
        grid: parse_grid(a.grid.as_deref())?,
        seed: a.seed,
        jobs,
        ..EvalConfig::default()
    };
    let corpus = corpus::restrict_to_task_labels(&load(&a.corpus)?).context("corpus")?;
    let report = eval::cross_validate(&corpus, &config).context("eval")?;
    write_atomic(&a.report_out, &to_json(&report)?)?;
    write_atomic(&text_out, report::render_eval(&report, "Model", 2).as_bytes())?;
    Ok(format!(
        "eval: {} records, macro-F1 {:.3}, accuracy {:.3} -> {} ({})",
        report.pooled.total,
        report.pooled.macro_f1,
        report.pooled.accuracy,
        a.report_out.display(),
        text_out.display()
    ))
}

fn parse_addons(list: &str) -> Result<Vec<BTreeSet<Family>>, CliError> {
    let addons: Vec<BTreeSet<Family>> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| families_arg(&item.replace('+', ","), "--addons"))
        .collect::<Result<_, _>>()?;
    if addons.is_empty() {
        return Err(usage("--addons: no addons given"));
    }
    Ok(addons)
}

fn ablate_cmd(a: AblateArgs, jobs: usize) -> Result<String, CliError> {
    require_file(&a.corpus, "--corpus")?;
    if let Some(p) = &a.space {
        require_file(p, "--space")?;
    }
    let text_out = text_path(&a.report_out);
    require_out(&a.report_out, "--report-out", &[&a.corpus])?;
    require_out(&text_out, "--report-out", &[&a.corpus])?;
    if a.k < 2 {
        return Err(usage("--k must be at least 2"));
    }
    let base = families_arg(&a.base_families, "--base-families")?;
    let addons = parse_addons(&a.addons)?;
    let config = EvalConfig {
        space: space_config_from(a.space.as_deref(), None)?,
        k: a.k,
        grid: parse_grid(a.grid.as_deref())?,
        seed: a.seed,
        jobs,
        ..EvalConfig::default()
    };
    let corpus = corpus::restrict_to_task_labels(&load(&a.corpus)?).context("corpus")?;
    let ablation = eval::run_ablations(&corpus, &base, &addons, &config).context("ablate")?;
    write_atomic(&a.report_out, &to_json(&ablation)?)?;
    write_atomic(&text_out, report::render_ablation(&ablation, 2).as_bytes())?;
    let scores: Vec<String> = ablation
        .rows
        .iter()
        .map(|r| format!("{} {:.3}", r.name, r.report.pooled.macro_f1))
        .collect();
    Ok(format!(
        "ablate: {} -> {} ({})",
        scores.join(", "),
        a.report_out.display(),
        text_out.display()
    ))
}

fn weights_cmd(a: WeightsArgs) -> Result<String, CliError> {
    for m in &a.models {
        require_file(m, "--models")?;
    }
    if let Some(p) = &a.report {
        require_file(p, "--report")?;
    }
    if let Some(out) = &a.out {
        let inputs: Vec<&Path> = a
            .models
            .iter()
            .map(PathBuf::as_path)
            .chain(a.report.as_deref())
            .collect();
        require_out(out, "--out", &inputs)?;
    }
    let weights = match &a.report {
        Some(p) => {
            let value: serde_json::Value = read_json(p)?;
            if value.get("rows").is_some() {
                let ablation: AblationReport = serde_json::from_value(value).context("ablation report")?;
                let Some(row) = ablation.row(PROPOSED_ROW).or(ablation.rows.first()) else {
                    return Err(anyhow!("ablation report {} has no rows", p.display()).into());
                };
                row.report.weights.clone()
            } else {
                let report: EvalReport = serde_json::from_value(value).context("eval report")?;
                report.weights
            }
        }
        None => {
            let models: Vec<LinearModel> = a
                .models
                .iter()
                .map(|p| read_json::<ModelFile>(p).map(|m| m.model))
                .collect::<anyhow::Result<_>>()?;
            classifier::median_feature_weights(&models).context("weights")?
        }
    };
    let text = report::render_weights(&weights, a.top);
    print!("{text}");
    if let Some(out) = &a.out {
        write_atomic(out, text.as_bytes())?;
        return Ok(format!("weights: {} models -> {}", weights.n_models, out.display()));
    }
    Ok(format!("weights: {} models", weights.n_models))
}

fn predict_cmd(a: PredictArgs) -> Result<String, CliError> {
    require_file(&a.model, "--model")?;
    require_file(&a.corpus, "--corpus")?;
    require_out(&a.out, "--out", &[&a.model, &a.corpus])?;
    let file: ModelFile = read_json(&a.model).context("model")?;
    let space = FeatureSpace::build(&file.space).context("feature space")?;
    if space.names() != file.model.feature_names {
        return Err(anyhow!("model: feature names do not match its feature space").into());
    }
    let corpus = load(&a.corpus)?;
    let mut out = Vec::new();
    for r in &corpus.records {
        let raw = features::extract_features(r, &space).with_context(|| format!("predict: record {}", r.id))?;
        let x = file.standardizer.apply(&raw).context("predict")?;
        let scores = file.model.decision_scores(x.as_slice()).context("predict")?;
        let predicted_label = file.model.predict(x.as_slice()).context("predict")?;
        let row = PredictionRow {
            id: &r.id,
            predicted_label,
            scores: file.model.classes.iter().map(|c| c.as_str()).zip(scores).collect(),
        };
        serde_json::to_writer(&mut out, &row).context("predict")?;
        out.push(b'\n');
    }
    write_atomic(&a.out, &out)?;
    Ok(format!("predict: {} records -> {}", corpus.len(), a.out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_path_replaces_json_extension() {
        assert_eq!(text_path(Path::new("out/r.json")), PathBuf::from("out/r.txt"));
        assert_eq!(text_path(Path::new("r.out")), PathBuf::from("r.out.txt"));
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid(Some("0.1, 1,10")).unwrap(), vec![0.1, 1.0, 10.0]);
        assert_eq!(parse_grid(None).unwrap(), DEFAULT_GRID.to_vec());
        assert!(matches!(parse_grid(Some("1,x")), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid(Some("0")), Err(CliError::Usage(_))));
    }

    #[test]
    fn addon_parsing() {
        let a = parse_addons("asr,nlu+lg").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1], [Family::Nlu, Family::Lg].into_iter().collect());
        assert!(parse_addons("asr,bogus").is_err());
    }
}
