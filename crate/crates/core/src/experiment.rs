//! Model-selection protocols and comparison outputs.
//!
//! - MLP: train several repetitions that differ only in seed, keep the one
//!   with the lowest test MSE.
//! - RBF: sweep the hidden-neuron count and keep the smallest count after
//!   which test RMSE stops improving.
//! - Compare the two winners on the same test partition and export
//!   per-sample deviations.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::{split, DataSplit, Dataset, Interval, NormalizedSet, Normalizer, SplitRatios};
use crate::exec::{self, derive_seed, Execution};
use crate::metrics::{self, EvalReport};
use crate::mlp::{self, MlpModel, MlpTrainConfig, TrainHistory};
use crate::persist::{ModelKind, TrainedModel};
use crate::rbf::{self, RbfModel, RbfTrainConfig};
use crate::{Error, Predictor, Result};

/// Plateau tolerance on test RMSE, °C.
pub const DEFAULT_PLATEAU_TOL: f64 = 1e-3;

/// A split dataset with its normalizer and normalized partitions.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub split: DataSplit,
    pub normalizer: Normalizer,
    pub train: NormalizedSet,
    pub validation: NormalizedSet,
    pub test: NormalizedSet,
}

/// Split, fit the normalizer on the training part, normalize every part.
pub fn prepare(dataset: &Dataset, ratios: SplitRatios, seed: u64, range: Interval) -> Result<Prepared> {
    let split = split(dataset, ratios, seed)?;
    let normalizer = Normalizer::fit(&split.train, range)?;
    Ok(Prepared {
        train: normalizer.apply_dataset(&split.train),
        validation: normalizer.apply_dataset(&split.validation),
        test: normalizer.apply_dataset(&split.test),
        split,
        normalizer,
    })
}

fn mse_celsius<M: Predictor + ?Sized>(model: &M, data: &Dataset, normalizer: &Normalizer) -> Result<f64> {
    let (a, p) = metrics::predictions_celsius(model, data, normalizer)?;
    metrics::mse(&a, &p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRow {
    /// 1-based.
    pub repetition: usize,
    pub validation: f64,
    pub training: f64,
    pub testing: f64,
}

impl RepetitionRow {
    fn columns(&self) -> [f64; 3] {
        [self.validation, self.training, self.testing]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub validation: f64,
    pub training: f64,
    pub testing: f64,
}

impl ColumnStats {
    fn from_columns(c: [f64; 3]) -> Self {
        ColumnStats { validation: c[0], training: c[1], testing: c[2] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSummary {
    pub minimum: ColumnStats,
    pub maximum: ColumnStats,
    pub average: ColumnStats,
}

/// 1-based index of the smallest test performance; ties go to the lowest index.
pub fn select_best_repetition(test_performance: &[f64]) -> Result<usize> {
    if test_performance.is_empty() {
        return Err(Error::Empty("repetition list"));
    }
    let mut best = 0;
    for (i, v) in test_performance.iter().enumerate() {
        if v.is_nan() {
            return Err(Error::invalid(format!("repetition {} has a NaN performance", i + 1)));
        }
        if *v < test_performance[best] {
            best = i;
        }
    }
    Ok(best + 1)
}

pub fn summarize_repetitions(rows: &[RepetitionRow]) -> Result<RepetitionSummary> {
    if rows.is_empty() {
        return Err(Error::Empty("repetition rows"));
    }
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    let mut sum = [0.0; 3];
    for r in rows {
        for (i, v) in r.columns().into_iter().enumerate() {
            min[i] = min[i].min(v);
            max[i] = max[i].max(v);
            sum[i] += v;
        }
    }
    let n = rows.len() as f64;
    Ok(RepetitionSummary {
        minimum: ColumnStats::from_columns(min),
        maximum: ColumnStats::from_columns(max),
        average: ColumnStats::from_columns(sum.map(|s| s / n)),
    })
}

#[derive(Debug, Clone)]
pub struct RepetitionOutcome {
    pub rows: Vec<RepetitionRow>,
    /// 1-based.
    pub best_index: usize,
    pub best_model: MlpModel,
    pub best_config: MlpTrainConfig,
    pub histories: Vec<TrainHistory>,
}

/// Trains `n_reps` MLPs with seeds `base.seed + (rep − 1)` and scores each
/// on all three partitions (MSE, °C²).
pub fn run_mlp_repetitions(
    base: &MlpTrainConfig,
    data: &Prepared,
    n_reps: usize,
    exec: Execution,
) -> Result<RepetitionOutcome> {
    if n_reps == 0 {
        return Err(Error::invalid("at least one repetition is required"));
    }
    base.validate()?;
    let runs = exec::try_map_indexed(exec, n_reps, |i| {
        let repetition = i + 1;
        let config = MlpTrainConfig { seed: base.seed.wrapping_add(i as u64), ..*base };
        let wrap = |e: Error| Error::Repetition { repetition, source: Box::new(e) };
        let (model, history) = mlp::train(&config, &data.train, &data.validation).map_err(wrap)?;
        let n = &data.normalizer;
        let row = RepetitionRow {
            repetition,
            validation: mse_celsius(&model, &data.split.validation, n).map_err(wrap)?,
            training: mse_celsius(&model, &data.split.train, n).map_err(wrap)?,
            testing: mse_celsius(&model, &data.split.test, n).map_err(wrap)?,
        };
        Ok((row, model, config, history))
    })?;
    let tests: Vec<f64> = runs.iter().map(|r| r.0.testing).collect();
    let best_index = select_best_repetition(&tests)?;
    let (_, best_model, best_config, _) = runs[best_index - 1].clone();
    let (rows, histories) = runs.into_iter().map(|(r, _, _, h)| (r, h)).unzip();
    Ok(RepetitionOutcome { rows, best_index, best_model, best_config, histories })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub neurons: usize,
    pub rmse: f64,
    pub r_paper: f64,
    pub mae: f64,
    pub r_pearson: f64,
}

/// Smallest grid point whose successor improves RMSE by less than `tol`;
/// without such a point, the argmin (smallest K on ties).
pub fn select_plateau(grid: &[usize], rmse: &[f64], tol: f64) -> Result<usize> {
    if grid.is_empty() {
        return Err(Error::Empty("neuron grid"));
    }
    if grid.len() != rmse.len() {
        return Err(Error::LengthMismatch { left: grid.len(), right: rmse.len() });
    }
    if let Some(i) = rmse.windows(2).position(|w| w[0] - w[1] < tol) {
        return Ok(grid[i]);
    }
    Ok(grid[select_best_repetition(rmse)? - 1])
}

pub fn validate_grid(grid: &[usize], train_size: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("neuron grid"));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("neuron grid {grid:?} must be positive and strictly increasing")));
    }
    let largest = grid[grid.len() - 1];
    if largest > train_size {
        return Err(Error::invalid(format!(
            "neuron grid maximum {largest} exceeds the training partition size {train_size}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub selected_neurons: usize,
    pub best_model: RbfModel,
    pub best_config: RbfTrainConfig,
}

/// One independently trained RBF per grid point. The seed for K is
/// `derive_seed(base.seed, K)`, so rows do not depend on the rest of the grid.
pub fn run_rbf_sweep(
    base: &RbfTrainConfig,
    data: &Prepared,
    grid: &[usize],
    plateau_tol: f64,
    exec: Execution,
) -> Result<SweepOutcome> {
    validate_grid(grid, data.train.len())?;
    if !(plateau_tol.is_finite() && plateau_tol >= 0.0) {
        return Err(Error::invalid("plateau tolerance must be non-negative"));
    }
    let runs = exec::try_map_indexed(exec, grid.len(), |i| {
        let neurons = grid[i];
        let config = RbfTrainConfig { neurons, seed: derive_seed(base.seed, neurons as u64), ..*base };
        let model = rbf::train(&config, &data.train)?;
        let report = metrics::evaluate(&model, &data.split.test, &data.normalizer)?;
        let row = SweepRow {
            neurons,
            rmse: report.rmse,
            r_paper: report.r_paper,
            mae: report.mae,
            r_pearson: report.r_pearson,
        };
        Ok((row, model, config))
    })?;
    let rmse: Vec<f64> = runs.iter().map(|r| r.0.rmse).collect();
    let selected_neurons = select_plateau(grid, &rmse, plateau_tol)?;
    let pos = grid.iter().position(|&k| k == selected_neurons).expect("selection comes from grid");
    let (_, best_model, best_config) = runs[pos].clone();
    Ok(SweepOutcome {
        rows: runs.into_iter().map(|r| r.0).collect(),
        selected_neurons,
        best_model,
        best_config,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub mae: f64,
    pub rmse: f64,
    pub r_paper: f64,
    pub r_pearson: f64,
}

impl ComparisonRow {
    pub fn from_report(model: ModelKind, r: &EvalReport) -> Self {
        ComparisonRow { model, mae: r.mae, rmse: r.rmse, r_paper: r.r_paper, r_pearson: r.r_pearson }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Verdict {
    Winner(ModelKind),
    Tie,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Winner(k) => write!(f, "{k}"),
            Verdict::Tie => f.write_str("tie"),
        }
    }
}

impl From<Verdict> for String {
    fn from(v: Verdict) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for Verdict {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        match s.as_str() {
            "MLP" => Ok(Verdict::Winner(ModelKind::Mlp)),
            "RBF" => Ok(Verdict::Winner(ModelKind::Rbf)),
            "tie" => Ok(Verdict::Tie),
            other => Err(format!("unknown verdict `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub winner: Verdict,
    pub n: usize,
}

/// Lower test RMSE wins; exactly equal RMSE is a tie.
pub fn decide(first: ComparisonRow, second: ComparisonRow, n: usize) -> ComparisonReport {
    let winner = if first.rmse < second.rmse {
        Verdict::Winner(first.model)
    } else if second.rmse < first.rmse {
        Verdict::Winner(second.model)
    } else {
        Verdict::Tie
    };
    ComparisonReport { rows: vec![first, second], winner, n }
}

/// Evaluates both models on `test`. They must share a normalizer.
pub fn compare(first: &TrainedModel, second: &TrainedModel, test: &Dataset) -> Result<ComparisonReport> {
    let (fa, fb) = (first.normalizer().fingerprint(), second.normalizer().fingerprint());
    if fa != fb {
        return Err(Error::NormalizerMismatch { left: fa, right: fb });
    }
    let ra = metrics::evaluate(first.network(), test, first.normalizer())?;
    let rb = metrics::evaluate(second.network(), test, second.normalizer())?;
    Ok(decide(
        ComparisonRow::from_report(first.kind(), &ra),
        ComparisonRow::from_report(second.kind(), &rb),
        test.len(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub index: usize,
    pub target: f64,
    pub prediction: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSeries {
    pub points: Vec<DeviationPoint>,
}

impl DeviationSeries {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("index,target,prediction,deviation\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.index, p.target, p.prediction, p.deviation);
        }
        out
    }

    pub fn mean_abs_deviation(&self) -> f64 {
        self.points.iter().map(|p| p.deviation.abs()).sum::<f64>() / self.points.len() as f64
    }
}

/// Signed `prediction − target` in °C for each test sample, in test order.
pub fn deviation_series<M: Predictor + ?Sized>(
    model: &M,
    test: &Dataset,
    normalizer: &Normalizer,
) -> Result<DeviationSeries> {
    let (targets, predictions) = metrics::predictions_celsius(model, test, normalizer)?;
    let points = targets
        .into_iter()
        .zip(predictions)
        .enumerate()
        .map(|(index, (target, prediction))| DeviationPoint {
            index,
            target,
            prediction,
            deviation: prediction - target,
        })
        .collect();
    Ok(DeviationSeries { points })
}
