//! JSON model documents.
//!
//! Both network kinds share one schema family:
//!
//! ```json
//! { "kind": "mlp" | "rbf", "schema_version": 1,
//!   "architecture": {...}, "parameters": {...},
//!   "normalizer": {...}, "config": {...} }
//! ```
//!
//! Matrices are flattened row-major. Floats are written in shortest
//! round-trip form, so a loaded model predicts bit-identically.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{write_file, Normalizer, INPUT_COUNT};
use crate::mlp::{MlpModel, MlpTrainConfig};
use crate::rbf::{Point, RbfModel, RbfTrainConfig};
use crate::{Error, Predictor, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Rbf,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Mlp => "MLP",
            ModelKind::Rbf => "RBF",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Network {
    Mlp(MlpModel),
    Rbf(RbfModel),
}

impl Network {
    pub fn kind(&self) -> ModelKind {
        match self {
            Network::Mlp(_) => ModelKind::Mlp,
            Network::Rbf(_) => ModelKind::Rbf,
        }
    }
}

impl Predictor for Network {
    fn predict_normalized(&self, inputs: &[f64; INPUT_COUNT]) -> Result<f64> {
        match self {
            Network::Mlp(m) => m.forward(inputs),
            Network::Rbf(m) => m.predict(inputs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainConfig {
    Mlp(MlpTrainConfig),
    Rbf(RbfTrainConfig),
}

/// A trained network together with the normalizer it was fitted under.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    network: Network,
    normalizer: Normalizer,
    config: TrainConfig,
}

impl TrainedModel {
    pub fn mlp(model: MlpModel, normalizer: Normalizer, config: MlpTrainConfig) -> Self {
        TrainedModel { network: Network::Mlp(model), normalizer, config: TrainConfig::Mlp(config) }
    }

    pub fn rbf(model: RbfModel, normalizer: Normalizer, config: RbfTrainConfig) -> Self {
        TrainedModel { network: Network::Rbf(model), normalizer, config: TrainConfig::Rbf(config) }
    }

    pub fn kind(&self) -> ModelKind {
        self.network.kind()
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Raw °C inputs to a °C prediction.
    pub fn predict_celsius(&self, inputs: &[f64; INPUT_COUNT]) -> Result<f64> {
        crate::domain::validate_inputs(inputs)?;
        let y = self.network.predict_normalized(&self.normalizer.normalize_inputs(inputs))?;
        Ok(self.normalizer.invert_target(y))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = match (&self.network, &self.config) {
            (Network::Mlp(m), TrainConfig::Mlp(c)) => Document::Mlp {
                schema_version: SCHEMA_VERSION,
                architecture: MlpArchitecture { inputs: INPUT_COUNT, hidden: m.hidden() },
                parameters: MlpParameters {
                    input_weights: m.input_weights().to_vec(),
                    hidden_biases: m.hidden_biases().to_vec(),
                    output_weights: m.output_weights().to_vec(),
                    output_bias: m.output_bias(),
                },
                normalizer: self.normalizer.clone(),
                config: *c,
            },
            (Network::Rbf(m), TrainConfig::Rbf(c)) => Document::Rbf {
                schema_version: SCHEMA_VERSION,
                architecture: RbfArchitecture { inputs: INPUT_COUNT, neurons: m.neurons() },
                parameters: RbfParameters {
                    centers: m.centers().iter().flatten().copied().collect(),
                    spread: m.spread(),
                    weights: m.weights().to_vec(),
                    bias: m.bias(),
                },
                normalizer: self.normalizer.clone(),
                config: *c,
            },
            _ => unreachable!("constructors pair network and config kinds"),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        match doc {
            Document::Mlp { schema_version, architecture, parameters, normalizer, config } => {
                check_header(schema_version, architecture.inputs)?;
                let p = parameters;
                let model = MlpModel::new(p.input_weights, p.hidden_biases, p.output_weights, p.output_bias)?;
                if model.hidden() != architecture.hidden {
                    return Err(Error::invalid(format!(
                        "architecture says {} hidden units, parameters hold {}",
                        architecture.hidden,
                        model.hidden()
                    )));
                }
                Ok(TrainedModel::mlp(model, normalizer, config))
            }
            Document::Rbf { schema_version, architecture, parameters, normalizer, config } => {
                check_header(schema_version, architecture.inputs)?;
                let p = parameters;
                if p.centers.len() != architecture.neurons * INPUT_COUNT {
                    return Err(Error::invalid(format!(
                        "{} center values do not match {} neurons",
                        p.centers.len(),
                        architecture.neurons
                    )));
                }
                let centers: Vec<Point> = p
                    .centers
                    .chunks_exact(INPUT_COUNT)
                    .map(|c| std::array::from_fn(|i| c[i]))
                    .collect();
                let model = RbfModel::new(centers, p.spread, p.weights, p.bias)?;
                Ok(TrainedModel::rbf(model, normalizer, config))
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrainedModel::from_json(&text)
    }
}

fn check_header(schema_version: u32, inputs: usize) -> Result<()> {
    if schema_version != SCHEMA_VERSION {
        return Err(Error::invalid(format!(
            "unsupported schema_version {schema_version} (expected {SCHEMA_VERSION})"
        )));
    }
    if inputs != INPUT_COUNT {
        return Err(Error::invalid(format!("model expects {inputs} inputs, not {INPUT_COUNT}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum Document {
    Mlp {
        schema_version: u32,
        architecture: MlpArchitecture,
        parameters: MlpParameters,
        normalizer: Normalizer,
        config: MlpTrainConfig,
    },
    Rbf {
        schema_version: u32,
        architecture: RbfArchitecture,
        parameters: RbfParameters,
        normalizer: Normalizer,
        config: RbfTrainConfig,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpArchitecture {
    inputs: usize,
    hidden: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpParameters {
    input_weights: Vec<f64>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RbfArchitecture {
    inputs: usize,
    neurons: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RbfParameters {
    centers: Vec<f64>,
    spread: f64,
    weights: Vec<f64>,
    bias: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Interval, FEATURE_COUNT};

    fn normalizer() -> Normalizer {
        Normalizer::from_extrema(
            [-10.0, 30.0, 0.0, 0.0, 0.0, 10.0],
            [10.0, 50.0, 1.0, 1.0, 1.0, 40.0],
            Interval::default(),
        )
        .unwrap()
    }

    #[test]
    fn mlp_document_round_trip() {
        let m = MlpModel::init(17, 4, 1.0).unwrap();
        let t = TrainedModel::mlp(m, normalizer(), MlpTrainConfig::default());
        let json = t.to_json().unwrap();
        assert!(json.contains("\"kind\": \"mlp\""));
        assert!(json.contains("\"schema_version\": 1"));
        assert_eq!(TrainedModel::from_json(&json).unwrap(), t);
    }

    #[test]
    fn rbf_document_round_trip() {
        let m = RbfModel::new(
            vec![[0.1, 0.2, 0.3, 0.4, 0.5], [-0.5, 0.0, 0.25, 1.0 / 3.0, -0.9]],
            0.7312,
            vec![1.0 / 7.0, -2.5],
            0.123_456_789_012_345_67,
        )
        .unwrap();
        let t = TrainedModel::rbf(m, normalizer(), RbfTrainConfig::default());
        let back = TrainedModel::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.kind(), ModelKind::Rbf);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let t = TrainedModel::mlp(MlpModel::zeros(1).unwrap(), normalizer(), MlpTrainConfig::default());
        let json = t.to_json().unwrap();
        let bumped = json.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(TrainedModel::from_json(&bumped).is_err());
        let extra = json.replacen('{', "{\"surprise\": 1,", 1);
        assert!(TrainedModel::from_json(&extra).is_err());
    }

    #[test]
    fn predict_celsius_denormalizes() {
        let m = MlpModel::zeros(2).unwrap();
        let t = TrainedModel::mlp(m, normalizer(), MlpTrainConfig::default());
        // zero network → midpoint of the target range → (10 + 40)/2
        assert_eq!(t.predict_celsius(&[0.0, 40.0, 0.5, 0.5, 0.5]).unwrap(), 25.0);
        assert_eq!(normalizer().minimums().len(), FEATURE_COUNT);
    }
}
