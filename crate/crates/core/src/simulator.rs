//! Lumped thermal model of a growing hall and a factorial data generator.
//!
//! The hall air is one well-mixed node:
//!
//! ```text
//! C dT/dt = k_water·tap·(T_water − T) + k_fresh·fresh·(T_ambient − T) + Q_compost
//! ```
//!
//! integrated with explicit Euler. The circulation damper only recirculates
//! indoor air, so it carries no net heat.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Provenance, Sample};
use crate::exec::{self, Execution};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HallParams {
    /// kJ/°C
    pub thermal_capacity: f64,
    /// kW/°C at a fully open tap
    pub k_water: f64,
    /// kW/°C at a fully open fresh-air damper
    pub k_fresh: f64,
    /// kW
    pub compost_heat: f64,
    /// °C, measurement noise on recorded samples
    pub noise_std: f64,
    /// s
    pub dt: f64,
    /// °C
    pub initial_temp: f64,
}

impl Default for HallParams {
    fn default() -> Self {
        HallParams {
            thermal_capacity: 5000.0,
            k_water: 2.0,
            k_fresh: 1.0,
            compost_heat: 3.0,
            noise_std: 0.2,
            dt: 60.0,
            initial_temp: 18.0,
        }
    }
}

impl HallParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.thermal_capacity,
            self.k_water,
            self.k_fresh,
            self.compost_heat,
            self.noise_std,
            self.dt,
            self.initial_temp,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("hall parameters must be finite"));
        }
        if self.thermal_capacity <= 0.0 {
            return Err(Error::invalid("thermal_capacity must be positive"));
        }
        if self.k_water < 0.0 || self.k_fresh < 0.0 {
            return Err(Error::invalid("conductances must be non-negative"));
        }
        if self.noise_std < 0.0 {
            return Err(Error::invalid("noise_std must be non-negative"));
        }
        if self.dt <= 0.0 {
            return Err(Error::invalid("dt must be positive"));
        }
        let courant = self.stability_number();
        if courant >= 1.0 {
            return Err(Error::invalid(format!(
                "dt·(k_water + k_fresh)/thermal_capacity = {courant} violates the explicit-Euler bound < 1"
            )));
        }
        Ok(())
    }

    pub fn stability_number(&self) -> f64 {
        self.dt * (self.k_water + self.k_fresh) / self.thermal_capacity
    }
}

/// Actuator and boundary settings held during one treatment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controls {
    pub ambient_temp: f64,
    pub water_temp: f64,
    pub fresh_damper: f64,
    pub circ_damper: f64,
    pub water_tap: f64,
}

impl Controls {
    pub fn validate(&self) -> Result<()> {
        crate::domain::validate_inputs(&self.as_inputs())
    }

    pub fn as_inputs(&self) -> [f64; 5] {
        [
            self.ambient_temp,
            self.water_temp,
            self.fresh_damper,
            self.circ_damper,
            self.water_tap,
        ]
    }

    pub fn record(&self, hall_temp: f64) -> Sample {
        Sample {
            ambient_temp: self.ambient_temp,
            water_temp: self.water_temp,
            fresh_damper: self.fresh_damper,
            circ_damper: self.circ_damper,
            water_tap: self.water_tap,
            hall_temp,
        }
    }
}

const THIRDS: [f64; 3] = [1.0 / 3.0, 2.0 / 3.0, 1.0];

/// Factorial treatment design. Defaults are three levels per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreatmentDesign {
    pub ambient_levels: Vec<f64>,
    pub water_levels: Vec<f64>,
    pub fresh_levels: Vec<f64>,
    pub circ_levels: Vec<f64>,
    pub tap_levels: Vec<f64>,
    pub repetitions: usize,
    pub settle_steps: usize,
}

impl Default for TreatmentDesign {
    fn default() -> Self {
        TreatmentDesign {
            ambient_levels: vec![-10.0, 0.0, 10.0],
            water_levels: vec![30.0, 40.0, 50.0],
            fresh_levels: THIRDS.to_vec(),
            circ_levels: THIRDS.to_vec(),
            tap_levels: THIRDS.to_vec(),
            repetitions: 3,
            settle_steps: 240,
        }
    }
}

impl TreatmentDesign {
    fn level_sets(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("ambient_levels", &self.ambient_levels),
            ("water_levels", &self.water_levels),
            ("fresh_levels", &self.fresh_levels),
            ("circ_levels", &self.circ_levels),
            ("tap_levels", &self.tap_levels),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, levels) in self.level_sets() {
            if levels.is_empty() {
                return Err(Error::invalid(format!("{name} is empty; the design has 0 cells")));
            }
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        for c in self.treatments() {
            c.validate()?;
        }
        Ok(())
    }

    /// Every level combination, ambient varying slowest and tap fastest.
    pub fn treatments(&self) -> Vec<Controls> {
        let mut out = Vec::new();
        for &ambient_temp in &self.ambient_levels {
            for &water_temp in &self.water_levels {
                for &fresh_damper in &self.fresh_levels {
                    for &circ_damper in &self.circ_levels {
                        for &water_tap in &self.tap_levels {
                            out.push(Controls {
                                ambient_temp,
                                water_temp,
                                fresh_damper,
                                circ_damper,
                                water_tap,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn cell_count(&self) -> usize {
        self.level_sets().iter().map(|(_, l)| l.len()).product::<usize>() * self.repetitions
    }
}

fn euler(current: f64, c: &Controls, p: &HallParams) -> f64 {
    let flux = p.k_water * c.water_tap * (c.water_temp - current)
        + p.k_fresh * c.fresh_damper * (c.ambient_temp - current)
        + p.compost_heat;
    current + p.dt * flux / p.thermal_capacity
}

/// One noise-free explicit-Euler step.
pub fn step(current: f64, controls: &Controls, params: &HallParams) -> Result<f64> {
    params.validate()?;
    controls.validate()?;
    if !current.is_finite() {
        return Err(Error::invalid("current temperature is not finite"));
    }
    Ok(euler(current, controls, params))
}

/// [`step`] plus zero-mean Gaussian process noise of `params.noise_std`.
pub fn step_noisy<R: Rng + ?Sized>(
    current: f64,
    controls: &Controls,
    params: &HallParams,
    rng: &mut R,
) -> Result<f64> {
    let next = step(current, controls, params)?;
    Ok(next + gaussian(params.noise_std, rng))
}

fn gaussian<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, std).expect("std validated non-negative").sample(rng)
}

/// Noise-free temperatures from `initial_temp` through `steps` steps
/// (length `steps + 1`).
pub fn trajectory(controls: &Controls, params: &HallParams, steps: usize) -> Result<Vec<f64>> {
    params.validate()?;
    controls.validate()?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut t = params.initial_temp;
    out.push(t);
    for _ in 0..steps {
        t = euler(t, controls, params);
        out.push(t);
    }
    Ok(out)
}

/// Noise-free temperature after `steps` steps from `initial_temp`.
pub fn settle(controls: &Controls, params: &HallParams, steps: usize) -> Result<f64> {
    params.validate()?;
    controls.validate()?;
    Ok((0..steps).fold(params.initial_temp, |t, _| euler(t, controls, params)))
}

/// Simulates every cell of `design` × repetitions and records one sample per
/// cell. Measurement noise for cell `i` comes from a stream keyed by
/// `(seed, i)`, so the result does not depend on `exec`.
pub fn generate(
    design: &TreatmentDesign,
    params: &HallParams,
    seed: u64,
    exec: Execution,
) -> Result<Dataset> {
    design.validate()?;
    params.validate()?;
    let treatments = design.treatments();
    let per_rep = treatments.len();
    let samples = exec::try_map_indexed(exec, design.cell_count(), |cell| {
        let controls = &treatments[cell % per_rep];
        let settled = settle(controls, params, design.settle_steps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(seed, cell as u64));
        Ok(controls.record(settled + gaussian(params.noise_std, &mut rng)))
    })?;
    Dataset::new(samples, Provenance::Synthetic { seed })
}
