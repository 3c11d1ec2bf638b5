//! Regression metrics on the raw (°C) scale.
//!
//! `A` is the target vector and `P` the prediction vector throughout.

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Normalizer};
use crate::{Error, Predictor, Result};

fn check(a: &[f64], p: &[f64]) -> Result<()> {
    if a.len() != p.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: p.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty("metric input"));
    }
    if a.iter().chain(p).any(|v| !v.is_finite()) {
        return Err(Error::invalid("metric input contains non-finite values"));
    }
    Ok(())
}

fn sum_squared_residuals(a: &[f64], p: &[f64]) -> f64 {
    a.iter().zip(p).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `1/N Σ (A − P)²`
pub fn mse(a: &[f64], p: &[f64]) -> Result<f64> {
    check(a, p)?;
    Ok(sum_squared_residuals(a, p) / a.len() as f64)
}

/// `√(1/N Σ (A − P)²)`
pub fn rmse(a: &[f64], p: &[f64]) -> Result<f64> {
    mse(a, p).map(f64::sqrt)
}

/// `Σ |A − P| / N`
pub fn mae(a: &[f64], p: &[f64]) -> Result<f64> {
    check(a, p)?;
    Ok(a.iter().zip(p).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// `(1 − Σ(A − P)² / Σ A²)^½`.
///
/// This is not Pearson's r: the residual sum is normalized by the raw second
/// moment of the targets. A negative radicand is an error.
pub fn r_paper(a: &[f64], p: &[f64]) -> Result<f64> {
    check(a, p)?;
    let energy: f64 = a.iter().map(|x| x * x).sum();
    if energy == 0.0 {
        return Err(Error::Undefined("r_paper undefined for this input: Σ A² = 0".into()));
    }
    let radicand = 1.0 - sum_squared_residuals(a, p) / energy;
    if radicand < 0.0 {
        return Err(Error::Undefined(format!(
            "r_paper undefined for this input: negative radicand {radicand}"
        )));
    }
    Ok(radicand.sqrt())
}

/// Sample Pearson correlation.
pub fn r_pearson(a: &[f64], p: &[f64]) -> Result<f64> {
    check(a, p)?;
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_p = p.iter().sum::<f64>() / n;
    let (mut sap, mut saa, mut spp) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(p) {
        let (da, dp) = (x - mean_a, y - mean_p);
        sap += da * dp;
        saa += da * da;
        spp += dp * dp;
    }
    if saa == 0.0 || spp == 0.0 {
        return Err(Error::Undefined("Pearson correlation needs non-zero variance in both inputs".into()));
    }
    Ok((sap / (saa.sqrt() * spp.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r_paper: f64,
    pub r_pearson: f64,
    pub n: usize,
}

impl EvalReport {
    pub fn from_vectors(a: &[f64], p: &[f64]) -> Result<Self> {
        let mse = mse(a, p)?;
        Ok(EvalReport {
            mse,
            rmse: mse.sqrt(),
            mae: mae(a, p)?,
            r_paper: r_paper(a, p)?,
            r_pearson: r_pearson(a, p)?,
            n: a.len(),
        })
    }
}

/// Targets and denormalized predictions (°C) for every sample in `data`.
pub fn predictions_celsius<M: Predictor + ?Sized>(
    model: &M,
    data: &Dataset,
    normalizer: &Normalizer,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut targets = Vec::with_capacity(data.len());
    let mut predictions = Vec::with_capacity(data.len());
    for s in data.iter() {
        let y = model.predict_normalized(&normalizer.normalize_inputs(&s.inputs()))?;
        targets.push(s.hall_temp);
        predictions.push(normalizer.invert_target(y));
    }
    Ok((targets, predictions))
}

/// Predicts in normalized space, denormalizes, and scores on °C.
pub fn evaluate<M: Predictor + ?Sized>(
    model: &M,
    data: &Dataset,
    normalizer: &Normalizer,
) -> Result<EvalReport> {
    let (a, p) = predictions_celsius(model, data, normalizer)?;
    EvalReport::from_vectors(&a, &p)
}
