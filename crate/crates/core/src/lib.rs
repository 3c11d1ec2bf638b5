//! Temperature predictors for a mushroom growing hall.
//!
//! The crate bundles everything needed to reproduce a small model-selection
//! study end to end:
//!
//! - [`domain`]: samples, datasets, seeded splitting and min-max normalization.
//! - [`simulator`]: a lumped thermal model of the hall that produces factorial
//!   training data when no field recordings are available.
//! - [`mlp`]: a 5→H→1 tanh perceptron trained by full-batch momentum descent
//!   with validation early stopping.
//! - [`rbf`]: a Gaussian radial-basis-function network with k-means centers and
//!   a closed-form ridge output layer.
//! - [`metrics`]: MSE, RMSE, MAE, the Σ A²-normalized correlation `r_paper`
//!   and Pearson's r.
//! - [`experiment`]: best-of-repetitions selection, neuron sweeps with plateau
//!   detection, model comparison and deviation series.
//! - [`persist`]: the JSON model document shared by both network kinds.
//!
//! Data-parallel loops (factorial cells, sweep points, repetitions) go through
//! [`exec`], which uses rayon when the `parallel` feature is enabled and falls
//! back to plain iteration otherwise. Results never depend on the schedule.

pub mod domain;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod mlp;
pub mod persist;
pub mod rbf;
pub mod report;
pub mod simulator;

pub use domain::{
    split, DataSplit, Dataset, Interval, NormalizedSet, Normalizer, Provenance, Sample,
    SplitRatios,
};
pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
pub use metrics::EvalReport;
pub use mlp::{MlpModel, MlpTrainConfig, TrainHistory};
pub use persist::{ModelKind, Network, TrainConfig, TrainedModel};
pub use rbf::{RbfModel, RbfTrainConfig};

/// Anything that maps a normalized input vector to a normalized prediction.
pub trait Predictor {
    fn predict_normalized(&self, inputs: &[f64; domain::INPUT_COUNT]) -> Result<f64>;
}
