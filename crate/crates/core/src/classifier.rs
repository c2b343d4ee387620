//! Linear SVM trained by dual coordinate descent, with a one-vs-rest
//! multiclass wrapper, inner cross-validation for the regularization
//! constant and median weight reports.
//!
//! The binary solver minimizes
//!
//! ```text
//!   ½‖w̃‖² + C Σᵢ max(0, 1 − yᵢ w̃·x̃ᵢ)
//! ```
//!
//! where `x̃ = (x, 1)` carries the bias as a constant feature, so the bias
//! is regularized together with the weights. The dual is
//! `max Σα − ½ αᵀQα` over the box `0 ≤ α ≤ C` with
//! `Qᵢⱼ = yᵢyⱼ x̃ᵢ·x̃ⱼ`; each coordinate step solves its one-dimensional
//! subproblem exactly and clips to the box.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CauseLabel;
use crate::eval::{self, MetricsError, StratificationError};
use crate::features::FeatureVector;
use crate::seeds;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("regularization constant must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("binary training needs both positive and negative examples")]
    SingleSign,
    #[error("non-finite feature value in example {0}")]
    NonFinite(usize),
    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("training needs at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("label {0} is not one of the four task labels")]
    NotTaskLabel(CauseLabel),
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("models do not share classes and feature names")]
    IncompatibleModels,
    #[error("no models given")]
    NoModels,
    #[error(transparent)]
    Stratification(#[from] StratificationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

pub type Result<T, E = ClassifierError> = std::result::Result<T, E>;

pub const DEFAULT_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
pub const INNER_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub c: f64,
    pub max_epochs: usize,
    /// Stop once the largest projected-gradient magnitude seen in a sweep
    /// falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 1000,
            tol: 1e-4,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub dual_objective: f64,
    /// Largest projected-gradient magnitude among the variables swept this
    /// epoch; shrunk variables are skipped.
    pub max_violation: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alpha: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub trace: Vec<EpochStats>,
}

impl BinarySolution {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dual objective `Σα − ½‖Σ αᵢyᵢx̃ᵢ‖²` evaluated from scratch.
pub fn dual_objective(xs: &[&[f64]], ys: &[f64], alpha: &[f64]) -> f64 {
    let d = xs.first().map_or(0, |x| x.len());
    let mut w = vec![0.0; d + 1];
    for ((x, &y), &a) in xs.iter().zip(ys).zip(alpha) {
        for (wj, xj) in w.iter_mut().zip(x.iter()) {
            *wj += a * y * xj;
        }
        w[d] += a * y;
    }
    alpha.iter().sum::<f64>() - 0.5 * dot(&w, &w)
}

/// Primal objective with the bias regularized as an extra weight.
pub fn primal_objective(xs: &[&[f64]], ys: &[f64], weights: &[f64], bias: f64, c: f64) -> f64 {
    let reg = 0.5 * (dot(weights, weights) + bias * bias);
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| (1.0 - y * (dot(weights, x) + bias)).max(0.0))
        .sum();
    reg + c * loss
}

/// Solves the binary L1-hinge SVM. Targets must be `+1.0` or `-1.0`.
pub fn train_binary(xs: &[&[f64]], ys: &[f64], params: &SolverParams) -> Result<BinarySolution> {
    let c = params.c;
    if !(c.is_finite() && c > 0.0) {
        return Err(ClassifierError::InvalidC(c));
    }
    if xs.len() != ys.len() {
        return Err(ClassifierError::LengthMismatch {
            what: "targets",
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let n = xs.len();
    let d = xs.first().map_or(0, |x| x.len());
    for (i, x) in xs.iter().enumerate() {
        if x.len() != d {
            return Err(ClassifierError::LengthMismatch {
                what: "example",
                expected: d,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::NonFinite(i));
        }
    }
    if !(ys.contains(&1.0) && ys.contains(&-1.0)) || ys.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(ClassifierError::SingleSign);
    }

    let q_diag: Vec<f64> = xs.iter().map(|x| dot(x, x) + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeds::rng(params.seed, "dcd-shuffle", 0);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut epochs = 0;
    // Shrinking: variables stuck at a bound are dropped from the sweep
    // until the active set converges, then everything is checked again.
    let mut active = n;
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);

    while epochs < params.max_epochs {
        epochs += 1;
        order[..active].shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (0.0f64, 0.0f64);
        let mut s = 0;
        while s < active {
            let i = order[s];
            let (x, y) = (xs[i], ys[i]);
            let g = y * (dot(&w, x) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.min(0.0)
            } else if alpha[i] >= c {
                if g < pg_min_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                let new = (old - g / q_diag[i]).clamp(0.0, c);
                alpha[i] = new;
                let step = (new - old) * y;
                if step != 0.0 {
                    for (wj, xj) in w.iter_mut().zip(x.iter()) {
                        *wj += step * xj;
                    }
                    b += step;
                }
            }
            s += 1;
        }
        let max_violation = pg_max.max(-pg_min);
        let dual = alpha.iter().sum::<f64>() - 0.5 * (dot(&w, &w) + b * b);
        let (lo, hi) = alpha.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
            (lo.min(a), hi.max(a))
        });
        trace.push(EpochStats {
            dual_objective: dual,
            max_violation,
            alpha_min: lo,
            alpha_max: hi,
        });
        if max_violation < params.tol {
            if active == n {
                converged = true;
                break;
            }
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
    }

    Ok(BinarySolution {
        weights: w,
        bias: b,
        alpha,
        epochs,
        converged,
        trace,
    })
}

/// Feature vectors with parallel task labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub vectors: Vec<FeatureVector>,
    pub labels: Vec<CauseLabel>,
}

impl TrainingSet {
    pub fn new(vectors: Vec<FeatureVector>, labels: Vec<CauseLabel>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(ClassifierError::LengthMismatch {
                what: "labels",
                expected: vectors.len(),
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|l| !l.is_task_label()) {
            return Err(ClassifierError::NotTaskLabel(bad));
        }
        Ok(Self { vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Present classes in canonical order.
    pub fn classes(&self) -> Vec<CauseLabel> {
        let present: BTreeSet<CauseLabel> = self.labels.iter().copied().collect();
        CauseLabel::TASK.into_iter().filter(|l| present.contains(l)).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            vectors: idx.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// One-vs-rest linear model. Rows of `weights` follow `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub classes: Vec<CauseLabel>,
    pub feature_names: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub hyper_c: f64,
    pub seed: u64,
}

impl LinearModel {
    pub fn decision_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_names.len() {
            return Err(ClassifierError::LengthMismatch {
                what: "feature vector",
                expected: self.feature_names.len(),
                actual: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect())
    }

    /// Argmax of the decision scores; exact ties go to the earlier class.
    pub fn predict(&self, x: &[f64]) -> Result<CauseLabel> {
        let scores = self.decision_scores(x)?;
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        Ok(self.classes[best])
    }
}

/// Trains one binary problem per present class with default solver limits.
pub fn train_multiclass(data: &TrainingSet, feature_names: &[String], c: f64, seed: u64) -> Result<LinearModel> {
    let params = SolverParams {
        c,
        seed,
        ..SolverParams::default()
    };
    train_multiclass_with(data, feature_names, &params, 1)
}

/// One-vs-rest training. With `jobs > 1` the per-class problems run on a
/// rayon pool; the result does not depend on `jobs`.
pub fn train_multiclass_with(
    data: &TrainingSet,
    feature_names: &[String],
    params: &SolverParams,
    jobs: usize,
) -> Result<LinearModel> {
    let classes = data.classes();
    if classes.len() < 2 {
        return Err(ClassifierError::TooFewClasses(classes.len()));
    }
    if let Some(v) = data.vectors.iter().find(|v| v.len() != feature_names.len()) {
        return Err(ClassifierError::LengthMismatch {
            what: "feature vector",
            expected: feature_names.len(),
            actual: v.len(),
        });
    }
    let xs: Vec<&[f64]> = data.vectors.iter().map(FeatureVector::as_slice).collect();
    let solve = |class: CauseLabel| -> Result<BinarySolution> {
        let ys: Vec<f64> = data
            .labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let p = SolverParams {
            seed: seeds::derive(params.seed, "ovr", class as u64),
            ..*params
        };
        train_binary(&xs, &ys, &p)
    };
    let solutions: Vec<BinarySolution> = if jobs > 1 {
        classes.par_iter().map(|&c| solve(c)).collect::<Result<_>>()?
    } else {
        classes.iter().map(|&c| solve(c)).collect::<Result<_>>()?
    };
    let (weights, bias) = solutions.into_iter().map(|s| (s.weights, s.bias)).unzip();
    Ok(LinearModel {
        classes,
        feature_names: feature_names.to_vec(),
        weights,
        bias,
        hyper_c: params.c,
        seed: params.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperSearch {
    pub best_c: f64,
    /// `(c, mean inner macro-F1)` in ascending `c`; empty when the grid
    /// has a single value.
    pub scores: Vec<(f64, f64)>,
}

/// Picks `c` by stratified inner cross-validation on `train` alone.
/// Highest mean macro-F1 wins; exact ties go to the smaller `c`.
pub fn select_hyperparameters(
    train: &TrainingSet,
    feature_names: &[String],
    grid: &[f64],
    base: &SolverParams,
) -> Result<HyperSearch> {
    let mut grid: Vec<f64> = grid.to_vec();
    if grid.is_empty() {
        return Err(ClassifierError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(ClassifierError::InvalidC(bad));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() == 1 {
        return Ok(HyperSearch {
            best_c: grid[0],
            scores: Vec::new(),
        });
    }

    let fold_seed = seeds::derive(base.seed, "inner-folds", 0);
    let fold_of = eval::stratified_folds(&train.labels, INNER_FOLDS, fold_seed)?;
    let classes = train.classes();
    let mut splits = Vec::with_capacity(INNER_FOLDS);
    for f in 0..INNER_FOLDS {
        let (fit, held): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| fold_of[i] != f);
        let fit = train.subset(&fit);
        if let Some(&missing) = classes.iter().find(|c| !fit.labels.contains(c)) {
            return Err(StratificationError {
                label: missing,
                detail: format!("inner fold {f} training split lacks the class"),
            }
            .into());
        }
        splits.push((fit, train.subset(&held)));
    }

    let mut scores = Vec::with_capacity(grid.len());
    for &c in &grid {
        let params = SolverParams { c, ..*base };
        let mut total = 0.0;
        for (f, (fit, held)) in splits.iter().enumerate() {
            let p = SolverParams {
                seed: seeds::derive(base.seed, "inner-solver", f as u64),
                ..params
            };
            let model = train_multiclass_with(fit, feature_names, &p, 1)?;
            let pred: Vec<CauseLabel> = held
                .vectors
                .iter()
                .map(|v| model.predict(v.as_slice()))
                .collect::<Result<_>>()?;
            total += eval::compute_metrics(&held.labels, &pred)?.macro_f1;
        }
        scores.push((c, total / splits.len() as f64));
    }
    let mut best = scores[0];
    for &s in &scores[1..] {
        if s.1 > best.1 {
            best = s;
        }
    }
    Ok(HyperSearch { best_c: best.0, scores })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedWeight {
    pub feature: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub label: CauseLabel,
    /// Sorted by descending weight, ties by feature name.
    pub weights: Vec<NamedWeight>,
}

impl ClassWeights {
    pub fn top(&self, n: usize) -> &[NamedWeight] {
        &self.weights[..n.min(self.weights.len())]
    }

    pub fn bottom(&self, n: usize) -> &[NamedWeight] {
        let len = self.weights.len();
        &self.weights[len - n.min(len)..]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub n_models: usize,
    pub classes: Vec<ClassWeights>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Elementwise median of the per-class weights across models.
pub fn median_feature_weights(models: &[LinearModel]) -> Result<WeightReport> {
    let first = models.first().ok_or(ClassifierError::NoModels)?;
    if models
        .iter()
        .any(|m| m.classes != first.classes || m.feature_names != first.feature_names)
    {
        return Err(ClassifierError::IncompatibleModels);
    }
    let classes = first
        .classes
        .iter()
        .enumerate()
        .map(|(k, &label)| {
            let mut weights: Vec<NamedWeight> = first
                .feature_names
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let mut column: Vec<f64> = models.iter().map(|m| m.weights[k][j]).collect();
                    NamedWeight {
                        feature: name.clone(),
                        weight: median(&mut column),
                    }
                })
                .collect();
            weights.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.feature.cmp(&b.feature)));
            ClassWeights { label, weights }
        })
        .collect();
    Ok(WeightReport {
        n_models: models.len(),
        classes,
    })
}
