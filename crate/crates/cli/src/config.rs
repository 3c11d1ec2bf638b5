//! Run configuration: one JSON document, unknown keys rejected.
//!
//! Every subsystem seed is derived from the single top-level `seed`.

use std::path::Path;

use hallnet_core::exec::derive_seed;
use hallnet_core::experiment::DEFAULT_PLATEAU_TOL;
use hallnet_core::mlp::MlpTrainConfig;
use hallnet_core::rbf::{CenterMethod, RbfTrainConfig, SpreadRule};
use hallnet_core::simulator::{HallParams, TreatmentDesign};
use hallnet_core::{Execution, Interval, SplitRatios};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

const SIMULATE_STREAM: u64 = 0;
const SPLIT_STREAM: u64 = 1;
const MLP_STREAM: u64 = 2;
const RBF_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub simulator: SimulatorBlock,
    #[serde(default)]
    pub split: SplitRatios,
    #[serde(default)]
    pub target_range: Interval,
    #[serde(default)]
    pub mlp: MlpBlock,
    #[serde(default)]
    pub rbf: RbfBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulatorBlock {
    pub design: TreatmentDesign,
    pub params: HallParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpBlock {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub init_scale: f64,
}

impl Default for MlpBlock {
    fn default() -> Self {
        let d = MlpTrainConfig::default();
        MlpBlock {
            hidden: d.hidden,
            learning_rate: d.learning_rate,
            momentum: d.momentum,
            max_epochs: d.max_epochs,
            patience: d.patience,
            init_scale: d.init_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbfBlock {
    pub neurons: usize,
    pub center_method: CenterMethod,
    pub kmeans_max_iters: usize,
    pub ridge: f64,
    pub spread_rule: SpreadRule,
}

impl Default for RbfBlock {
    fn default() -> Self {
        let d = RbfTrainConfig::default();
        RbfBlock {
            neurons: d.neurons,
            center_method: d.center_method,
            kmeans_max_iters: d.kmeans_max_iters,
            ridge: d.ridge,
            spread_rule: d.spread_rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub grid: Vec<usize>,
    pub plateau_tol: f64,
    /// 0 skips the MLP repetition study.
    pub mlp_repetitions: usize,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock { grid: vec![4, 8, 12, 16, 20, 24], plateau_tol: DEFAULT_PLATEAU_TOL, mlp_repetitions: 3 }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 0,
            parallel: false,
            simulator: SimulatorBlock::default(),
            split: SplitRatios::default(),
            target_range: Interval::default(),
            mlp: MlpBlock::default(),
            rbf: RbfBlock::default(),
            sweep: SweepBlock::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |e: hallnet_core::Error| CliError::validation(format!("config: {e}"));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::validation(format!(
                "config: schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.simulator.design.validate().map_err(fail)?;
        self.simulator.params.validate().map_err(fail)?;
        self.split.validate().map_err(fail)?;
        self.mlp_config().validate().map_err(fail)?;
        self.rbf_config().validate().map_err(fail)?;
        if self.sweep.grid.is_empty() {
            return Err(CliError::validation("config: sweep.grid must not be empty"));
        }
        if self.sweep.grid[0] == 0 || self.sweep.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::validation("config: sweep.grid must be positive and strictly increasing"));
        }
        if !(self.sweep.plateau_tol.is_finite() && self.sweep.plateau_tol >= 0.0) {
            return Err(CliError::validation("config: sweep.plateau_tol must be non-negative"));
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        Execution::from_flag(self.parallel)
    }

    pub fn simulate_seed(&self) -> u64 {
        derive_seed(self.seed, SIMULATE_STREAM)
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.seed, SPLIT_STREAM)
    }

    pub fn mlp_config(&self) -> MlpTrainConfig {
        let b = &self.mlp;
        MlpTrainConfig {
            hidden: b.hidden,
            learning_rate: b.learning_rate,
            momentum: b.momentum,
            max_epochs: b.max_epochs,
            patience: b.patience,
            seed: derive_seed(self.seed, MLP_STREAM),
            init_scale: b.init_scale,
        }
    }

    pub fn rbf_config(&self) -> RbfTrainConfig {
        let b = &self.rbf;
        RbfTrainConfig {
            neurons: b.neurons,
            center_method: b.center_method,
            kmeans_max_iters: b.kmeans_max_iters,
            ridge: b.ridge,
            spread_rule: b.spread_rule,
            seed: derive_seed(self.seed, RBF_STREAM),
        }
    }
}
