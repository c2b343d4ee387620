//! Evaluation protocol: stratified k-fold cross-validation with an inner
//! hyperparameter search, per-label metrics, input-type breakdowns,
//! paired t-tests and feature-family ablations.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::classifier::{self, ClassifierError, LinearModel, SolverParams, TrainingSet, WeightReport, DEFAULT_GRID};
use crate::corpus::{CauseLabel, Corpus, CorpusError, ExchangeRecord, InputSwitch};
use crate::features::{self, Family, FeatureError, FeatureSpace, FeatureSpaceConfig, FeatureVector, Standardizer};
use crate::seeds;

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
#[error("cannot stratify class {label}: {detail}")]
pub struct StratificationError {
    pub label: CauseLabel,
    pub detail: String,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricsError {
    #[error("no predictions to score")]
    Empty,
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("label {0} is not one of the four task labels")]
    NotTaskLabel(CauseLabel),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TTestError {
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("paired t-test needs at least two pairs, got {0}")]
    TooFew(usize),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Stratification(#[from] StratificationError),
    #[error("need k >= 2 folds and at least k records (k = {k}, records = {n})")]
    BadFoldCount { k: usize, n: usize },
    #[error("record {0:?} has no fold assignment")]
    Unassigned(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    TTest(#[from] TTestError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

/// Stratified fold index per label: each class is shuffled with its own
/// sub-stream and dealt round-robin, continuing the rotation from the
/// previous class so overall fold sizes differ by at most one.
pub fn stratified_folds(
    labels: &[CauseLabel],
    k: usize,
    seed: u64,
) -> std::result::Result<Vec<usize>, StratificationError> {
    let mut by_class: BTreeMap<CauseLabel, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0usize;
    for (&label, members) in &mut by_class {
        if members.len() < 2 {
            return Err(StratificationError {
                label,
                detail: format!("{} member(s); at least 2 are needed", members.len()),
            });
        }
        let mut rng = seeds::rng(seed, "folds", label as u64);
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    Ok(fold_of)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold(&self, id: &str) -> Option<usize> {
        self.fold_of.get(id).copied()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.fold_of.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

pub fn make_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldAssignment> {
    let labels = task_labels(corpus)?;
    if k < 2 || corpus.len() < k {
        return Err(EvalError::BadFoldCount { k, n: corpus.len() });
    }
    let fold_idx = stratified_folds(&labels, k, seed)?;
    Ok(FoldAssignment {
        k,
        fold_of: corpus
            .records
            .iter()
            .zip(fold_idx)
            .map(|(r, f)| (r.id.clone(), f))
            .collect(),
    })
}

fn task_labels(corpus: &Corpus) -> Result<Vec<CauseLabel>> {
    let labels = corpus.gold_labels()?;
    if let Some(&bad) = labels.iter().find(|l| !l.is_task_label()) {
        return Err(MetricsError::NotTaskLabel(bad).into());
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: CauseLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub predicted: usize,
    /// No gold instances of this class among the scored records.
    pub zero_support: bool,
    /// Neither gold nor predicted instances; F1 is reported as 0.
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// One entry per task label in canonical order.
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub total: usize,
    /// Gold rows by predicted columns.
    pub confusion: [[usize; 4]; 4],
}

impl Metrics {
    pub fn class(&self, label: CauseLabel) -> &ClassMetrics {
        &self.per_class[label.task_index().expect("task label")]
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest precision, recall and F1 per task label plus macro and
/// support-weighted averages. Macro averages run over all four labels.
pub fn compute_metrics(gold: &[CauseLabel], pred: &[CauseLabel]) -> Result<Metrics, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut confusion = [[0usize; 4]; 4];
    for (&g, &p) in gold.iter().zip(pred) {
        let gi = g.task_index().ok_or(MetricsError::NotTaskLabel(g))?;
        let pi = p.task_index().ok_or(MetricsError::NotTaskLabel(p))?;
        confusion[gi][pi] += 1;
    }
    let total = gold.len();
    let per_class: Vec<ClassMetrics> = CauseLabel::TASK
        .iter()
        .enumerate()
        .map(|(k, &label)| {
            let tp = confusion[k][k];
            let support: usize = confusion[k].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[k]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label,
                precision,
                recall,
                f1,
                support,
                predicted,
                zero_support: support == 0,
                undefined: support == 0 && predicted == 0,
            }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / per_class.len() as f64;
    let weighted =
        |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total as f64;
    let correct: usize = (0..4).map(|k| confusion[k][k]).sum();
    Ok(Metrics {
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        weighted_precision: weighted(|c| c.precision),
        weighted_recall: weighted(|c| c.recall),
        weighted_f1: weighted(|c| c.f1),
        accuracy: ratio(correct, total),
        total,
        confusion,
        per_class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    /// `None` when the differences have zero variance but a nonzero mean.
    pub t: Option<f64>,
    pub p: f64,
    pub df: usize,
    /// Zero-variance differences with a nonzero mean; `p` is reported as 0.
    pub degenerate: bool,
}

impl TTest {
    /// `+` for p < 0.01, `*` for p < 0.05.
    pub fn marker(&self) -> &'static str {
        if self.p < 0.01 {
            "+"
        } else if self.p < 0.05 {
            "*"
        } else {
            ""
        }
    }
}

/// Two-sided Student-t survival probability `P(|T| > t)`.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Paired two-sided t-test on `a[i] − b[i]`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, TTestError> {
    if a.len() != b.len() {
        return Err(TTestError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(TTestError::TooFew(n));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let df = n - 1;
    if d.iter().all(|&x| x == 0.0) {
        return Ok(TTest {
            n,
            mean_diff: 0.0,
            sd_diff: 0.0,
            t: Some(0.0),
            p: 1.0,
            df,
            degenerate: false,
        });
    }
    if sd == 0.0 {
        return Ok(TTest {
            n,
            mean_diff: mean,
            sd_diff: 0.0,
            t: None,
            p: 0.0,
            df,
            degenerate: true,
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok(TTest {
        n,
        mean_diff: mean,
        sd_diff: sd,
        t: Some(t),
        p: t_two_sided_p(t, df as f64),
        df,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub switch: InputSwitch,
    pub metrics: Metrics,
}

/// Metrics per modality pair. Segments without records are omitted.
pub fn breakdown_by_input_type(
    gold: &[CauseLabel],
    pred: &[CauseLabel],
    records: &[ExchangeRecord],
) -> Result<Vec<SegmentMetrics>, MetricsError> {
    if gold.len() != records.len() || pred.len() != records.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut out = Vec::new();
    for switch in InputSwitch::ALL {
        let idx: Vec<usize> = (0..records.len())
            .filter(|&i| records[i].input_switch() == switch)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let g: Vec<_> = idx.iter().map(|&i| gold[i]).collect();
        let p: Vec<_> = idx.iter().map(|&i| pred[i]).collect();
        out.push(SegmentMetrics {
            switch,
            metrics: compute_metrics(&g, &p)?,
        });
    }
    Ok(out)
}

/// Everything a cross-validation run depends on besides the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub space: FeatureSpaceConfig,
    pub k: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub max_epochs: usize,
    pub tol: f64,
    /// Worker threads for the outer folds; results do not depend on it.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let solver = SolverParams::default();
        Self {
            space: FeatureSpaceConfig::default(),
            k: 10,
            grid: DEFAULT_GRID.to_vec(),
            seed: 42,
            max_epochs: solver.max_epochs,
            tol: solver.tol,
            jobs: 1,
        }
    }
}

impl EvalConfig {
    pub fn with_families<I: IntoIterator<Item = Family>>(mut self, families: I) -> Self {
        self.space = self.space.with_families(families);
        self
    }

    fn solver(&self, seed: u64) -> SolverParams {
        SolverParams {
            c: 1.0,
            max_epochs: self.max_epochs,
            tol: self.tol,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFingerprint {
    pub families: Vec<String>,
    pub intents: Vec<String>,
    pub k: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub max_epochs: usize,
    pub tol: f64,
    pub n_records: usize,
    pub n_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub selected_c: f64,
    pub inner_scores: Vec<(f64, f64)>,
    pub metrics: Metrics,
    pub standardizer: Standardizer,
    pub model: LinearModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub fold: usize,
    pub gold: CauseLabel,
    pub predicted: CauseLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub baseline: String,
    pub macro_f1: TTest,
    /// Per-label F1 tests, canonical order.
    pub per_class_f1: Vec<TTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ConfigFingerprint,
    pub folds: Vec<FoldResult>,
    /// Metrics over all out-of-fold predictions; its confusion matrix is the
    /// sum of the per-fold matrices.
    pub pooled: Metrics,
    pub per_fold_macro_f1: Vec<f64>,
    pub segments: Vec<SegmentMetrics>,
    pub weights: WeightReport,
    pub predictions: Vec<Prediction>,
    #[serde(default)]
    pub significance: Option<Significance>,
}

impl EvalReport {
    pub fn per_fold_class_f1(&self, label: CauseLabel) -> Vec<f64> {
        self.folds.iter().map(|f| f.metrics.class(label).f1).collect()
    }

    pub fn compare_to(&self, baseline: &EvalReport, name: &str) -> Result<Significance> {
        let macro_f1 = paired_t_test(&self.per_fold_macro_f1, &baseline.per_fold_macro_f1)?;
        let per_class_f1 = CauseLabel::TASK
            .iter()
            .map(|&l| paired_t_test(&self.per_fold_class_f1(l), &baseline.per_fold_class_f1(l)))
            .collect::<Result<_, _>>()?;
        Ok(Significance {
            baseline: name.to_string(),
            macro_f1,
            per_class_f1,
        })
    }
}

struct FoldFit {
    selected_c: f64,
    inner_scores: Vec<(f64, f64)>,
    standardizer: Standardizer,
    model: LinearModel,
}

/// Fits one outer fold from its training part only.
fn fit_fold(train: &TrainingSet, space: &FeatureSpace, config: &EvalConfig, fold: usize) -> Result<FoldFit> {
    let standardizer = Standardizer::fit(&train.vectors, space)?;
    let scaled = TrainingSet::new(standardizer.apply_all(&train.vectors)?, train.labels.clone())?;
    let names = space.names();
    let search = classifier::select_hyperparameters(
        &scaled,
        &names,
        &config.grid,
        &config.solver(seeds::derive(config.seed, "inner", fold as u64)),
    )?;
    let params = SolverParams {
        c: search.best_c,
        ..config.solver(seeds::derive(config.seed, "solver", fold as u64))
    };
    let model = classifier::train_multiclass_with(&scaled, &names, &params, 1)?;
    Ok(FoldFit {
        selected_c: search.best_c,
        inner_scores: search.scores,
        standardizer,
        model,
    })
}

/// Outer k-fold cross-validation with stratified folds drawn from
/// `config.seed`.
pub fn cross_validate(corpus: &Corpus, config: &EvalConfig) -> Result<EvalReport> {
    let folds = make_folds(corpus, config.k, config.seed)?;
    cross_validate_with_folds(corpus, config, &folds)
}

/// Cross-validation over a fixed fold assignment. For every fold the
/// standardizer and the regularization constant are fitted on that fold's
/// training records only.
pub fn cross_validate_with_folds(corpus: &Corpus, config: &EvalConfig, folds: &FoldAssignment) -> Result<EvalReport> {
    let labels = task_labels(corpus)?;
    let space = FeatureSpace::build(&config.space)?;
    let vectors: Vec<FeatureVector> = corpus
        .records
        .iter()
        .map(|r| features::extract_features(r, &space))
        .collect::<Result<_, _>>()?;
    let fold_idx: Vec<usize> = corpus
        .records
        .iter()
        .map(|r| folds.fold(&r.id).ok_or_else(|| EvalError::Unassigned(r.id.clone())))
        .collect::<Result<_>>()?;
    let data = TrainingSet::new(vectors, labels)?;

    let run_fold = |f: usize| -> Result<(FoldResult, Vec<usize>, Vec<CauseLabel>)> {
        let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| fold_idx[i] != f);
        let train = data.subset(&train_idx);
        let fit = fit_fold(&train, &space, config, f)?;
        let pred: Vec<CauseLabel> = test_idx
            .iter()
            .map(|&i| {
                let x = fit.standardizer.apply(&data.vectors[i])?;
                Ok(fit.model.predict(x.as_slice())?)
            })
            .collect::<Result<_>>()?;
        let gold: Vec<CauseLabel> = test_idx.iter().map(|&i| data.labels[i]).collect();
        let metrics = compute_metrics(&gold, &pred)?;
        Ok((
            FoldResult {
                fold: f,
                n_train: train_idx.len(),
                n_test: test_idx.len(),
                selected_c: fit.selected_c,
                inner_scores: fit.inner_scores,
                metrics,
                standardizer: fit.standardizer,
                model: fit.model,
            },
            test_idx,
            pred,
        ))
    };

    let outcomes: Vec<_> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| EvalError::Pool(e.to_string()))?;
        pool.install(|| (0..folds.k).into_par_iter().map(run_fold).collect::<Result<Vec<_>>>())?
    } else {
        (0..folds.k).map(run_fold).collect::<Result<Vec<_>>>()?
    };

    let mut predicted = vec![None; data.len()];
    let mut fold_results = Vec::with_capacity(outcomes.len());
    for (result, test_idx, pred) in outcomes {
        for (i, p) in test_idx.into_iter().zip(pred) {
            predicted[i] = Some(p);
        }
        fold_results.push(result);
    }
    let predicted: Vec<CauseLabel> = predicted
        .into_iter()
        .map(|p| p.expect("every record is in exactly one test fold"))
        .collect();

    let pooled = compute_metrics(&data.labels, &predicted)?;
    let segments = breakdown_by_input_type(&data.labels, &predicted, &corpus.records)?;
    let models: Vec<LinearModel> = fold_results.iter().map(|f| f.model.clone()).collect();
    let weights = classifier::median_feature_weights(&models)?;
    let predictions = corpus
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| Prediction {
            id: r.id.clone(),
            fold: fold_idx[i],
            gold: data.labels[i],
            predicted: predicted[i],
        })
        .collect();

    Ok(EvalReport {
        config: ConfigFingerprint {
            families: space.families().iter().map(|f| f.to_string()).collect(),
            intents: space.intents().to_vec(),
            k: folds.k,
            grid: config.grid.clone(),
            seed: config.seed,
            max_epochs: config.max_epochs,
            tol: config.tol,
            n_records: corpus.len(),
            n_features: space.len(),
        },
        per_fold_macro_f1: fold_results.iter().map(|f| f.metrics.macro_f1).collect(),
        folds: fold_results,
        pooled,
        segments,
        weights,
        predictions,
        significance: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    pub families: Vec<String>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub folds: FoldAssignment,
    /// Baseline first, then all families, then baseline plus each addon.
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, name: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

pub const BASELINE_ROW: &str = "Baseline (B.)";
pub const PROPOSED_ROW: &str = "Proposed";

fn addon_name(addon: &BTreeSet<Family>) -> String {
    let parts: Vec<&str> = addon.iter().map(|f| f.label()).collect();
    format!("B. + {}", parts.join(" + "))
}

/// Runs the baseline, all families and baseline plus each addon on one
/// shared fold assignment, and tests each variant against the baseline
/// on per-fold F1.
pub fn run_ablations(
    corpus: &Corpus,
    base: &BTreeSet<Family>,
    addons: &[BTreeSet<Family>],
    config: &EvalConfig,
) -> Result<AblationReport> {
    let folds = make_folds(corpus, config.k, config.seed)?;
    let run = |families: &BTreeSet<Family>| {
        let cfg = config.clone().with_families(families.iter().copied());
        cross_validate_with_folds(corpus, &cfg, &folds)
    };
    let mut variants: Vec<(String, BTreeSet<Family>)> =
        vec![(PROPOSED_ROW.to_string(), Family::ALL.into_iter().collect())];
    for addon in addons {
        let fams: BTreeSet<Family> = base.union(addon).copied().collect();
        variants.push((addon_name(addon), fams));
    }

    let baseline = run(base)?;
    let mut rows = vec![AblationRow {
        name: BASELINE_ROW.to_string(),
        families: base.iter().map(|f| f.to_string()).collect(),
        report: baseline.clone(),
    }];
    for (name, fams) in variants {
        let mut report = run(&fams)?;
        report.significance = Some(report.compare_to(&baseline, BASELINE_ROW)?);
        rows.push(AblationRow {
            name,
            families: fams.iter().map(|f| f.to_string()).collect(),
            report,
        });
    }
    Ok(AblationReport { folds, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use CauseLabel::*;

    #[test]
    fn perfect_predictions() {
        let gold = vec![NoError, AsrError, NluError, LgError, NoError];
        let m = compute_metrics(&gold, &gold).unwrap();
        for c in &m.per_class {
            assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(m.accuracy, 1.0);
        for (i, row) in m.confusion.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v > 0, i == j);
            }
        }
    }

    #[test]
    fn all_wrong() {
        let m = compute_metrics(&[NoError; 3], &[AsrError; 3]).unwrap();
        assert_eq!(m.class(NoError).recall, 0.0);
        assert_eq!(m.class(AsrError).precision, 0.0);
        assert_eq!(m.accuracy, 0.0);
        assert!(m.class(AsrError).zero_support && !m.class(AsrError).undefined);
        assert!(m.class(LgError).undefined);
    }

    #[test]
    fn two_class_hand_example() {
        let gold = [NoError, NoError, AsrError, AsrError];
        let pred = [NoError, AsrError, AsrError, AsrError];
        let m = compute_metrics(&gold, &pred).unwrap();
        let (a, b) = (m.class(NoError), m.class(AsrError));
        assert_eq!(a.precision, 1.0);
        assert_eq!(a.recall, 0.5);
        assert!((a.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((b.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(b.recall, 1.0);
        assert!((b.f1 - 0.8).abs() < 1e-12);
        assert!((m.macro_f1 - (2.0 / 3.0 + 0.8) / 4.0).abs() < 1e-12);
        assert!((m.weighted_f1 - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn metric_input_errors() {
        assert_eq!(compute_metrics(&[], &[]), Err(MetricsError::Empty));
        assert!(matches!(
            compute_metrics(&[NoError], &[]),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert_eq!(
            compute_metrics(&[EndpointError], &[NoError]),
            Err(MetricsError::NotTaskLabel(EndpointError))
        );
    }

    #[test]
    fn stratified_balance() {
        let labels: Vec<CauseLabel> = CauseLabel::TASK
            .iter()
            .flat_map(|&l| std::iter::repeat_n(l, 10))
            .collect();
        let folds = stratified_folds(&labels, 10, 1).unwrap();
        for f in 0..10 {
            let members: Vec<_> = (0..40).filter(|&i| folds[i] == f).map(|i| labels[i]).collect();
            assert_eq!(members.len(), 4);
            let distinct: BTreeSet<_> = members.iter().collect();
            assert_eq!(distinct.len(), 4);
        }
        assert_eq!(folds, stratified_folds(&labels, 10, 1).unwrap());
        assert_ne!(folds, stratified_folds(&labels, 10, 2).unwrap());
    }

    #[test]
    fn uneven_classes_keep_sizes_within_one() {
        let mut labels = vec![NoError; 13];
        labels.extend([AsrError; 7]);
        labels.extend([LgError; 3]);
        let folds = stratified_folds(&labels, 5, 9).unwrap();
        let mut sizes = [0; 5];
        for f in folds {
            sizes[f] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn singleton_class_cannot_be_stratified() {
        let mut labels = vec![NoError; 20];
        labels.push(LgError);
        let err = stratified_folds(&labels, 10, 0).unwrap_err();
        assert_eq!(err.label, LgError);
    }

    #[test]
    fn t_test_identical_samples() {
        let a = [0.5, 0.6, 0.7];
        let t = paired_t_test(&a, &a).unwrap();
        assert_eq!((t.t, t.p, t.degenerate), (Some(0.0), 1.0, false));
    }

    #[test]
    fn t_test_zero_variance() {
        let t = paired_t_test(&[2.0; 4], &[1.0; 4]).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.p, 0.0);
        assert_eq!(t.t, None);
        assert_eq!(t.marker(), "+");
    }

    #[test]
    fn t_test_errors() {
        assert_eq!(
            paired_t_test(&[1.0], &[1.0, 2.0]),
            Err(TTestError::LengthMismatch(1, 2))
        );
        assert_eq!(paired_t_test(&[1.0], &[2.0]), Err(TTestError::TooFew(1)));
    }

    #[test]
    fn t_markers() {
        let mk = |p| TTest {
            n: 10,
            mean_diff: 0.1,
            sd_diff: 0.1,
            t: Some(1.0),
            p,
            df: 9,
            degenerate: false,
        };
        assert_eq!(mk(0.009).marker(), "+");
        assert_eq!(mk(0.01).marker(), "*");
        assert_eq!(mk(0.049).marker(), "*");
        assert_eq!(mk(0.05).marker(), "");
    }
}
