//! Samples, datasets, seeded splitting and min-max normalization.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const INPUT_COUNT: usize = 5;
pub const FEATURE_COUNT: usize = INPUT_COUNT + 1;
pub const TARGET_INDEX: usize = INPUT_COUNT;

/// Column names in CSV order; the last one is the target.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "ambient_temp",
    "water_temp",
    "fresh_damper",
    "circ_damper",
    "water_tap",
    "hall_temp",
];

pub const MIN_SPLIT_SAMPLES: usize = 10;

/// One observation: five actuator/environment inputs and the hall temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub ambient_temp: f64,
    pub water_temp: f64,
    pub fresh_damper: f64,
    pub circ_damper: f64,
    pub water_tap: f64,
    pub hall_temp: f64,
}

impl Sample {
    pub fn from_features(f: [f64; FEATURE_COUNT]) -> Self {
        Sample {
            ambient_temp: f[0],
            water_temp: f[1],
            fresh_damper: f[2],
            circ_damper: f[3],
            water_tap: f[4],
            hall_temp: f[5],
        }
    }

    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        [
            self.ambient_temp,
            self.water_temp,
            self.fresh_damper,
            self.circ_damper,
            self.water_tap,
            self.hall_temp,
        ]
    }

    pub fn inputs(&self) -> [f64; INPUT_COUNT] {
        [
            self.ambient_temp,
            self.water_temp,
            self.fresh_damper,
            self.circ_damper,
            self.water_tap,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        validate_inputs(&self.inputs())?;
        if !self.hall_temp.is_finite() {
            return Err(Error::invalid("hall_temp is not finite"));
        }
        Ok(())
    }
}

/// Checks temperatures are finite and openness fractions lie in [0, 1].
pub fn validate_inputs(inputs: &[f64; INPUT_COUNT]) -> Result<()> {
    for (i, v) in inputs.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid(format!("{} is not finite", FEATURE_NAMES[i])));
        }
        if (2..5).contains(&i) && !(0.0..=1.0).contains(v) {
            return Err(Error::invalid(format!(
                "{} = {v} is outside [0, 1]",
                FEATURE_NAMES[i]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic { seed: u64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, provenance: Provenance) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::invalid(format!("sample {i}: {e}")))?;
        }
        Ok(Dataset { samples, provenance })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.hall_temp).collect()
    }

    fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Parses the dataset CSV format. Columns must be exactly the six
    /// [`FEATURE_NAMES`], in any order.
    pub fn from_csv_reader<R: Read>(reader: R, provenance: Provenance) -> Result<Self> {
        let rows = read_columns(reader, &FEATURE_NAMES, &[])?;
        let samples = rows
            .into_iter()
            .map(|r| Sample::from_features([r[0], r[1], r[2], r[3], r[4], r[5]]))
            .collect();
        Dataset::new(samples, provenance)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::from_csv_reader(
            std::io::BufReader::new(file),
            Provenance::File { path: path.to_path_buf() },
        )
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = FEATURE_NAMES.join(",");
        out.push('\n');
        for s in &self.samples {
            let f = s.features();
            let _ = writeln!(out, "{},{},{},{},{},{}", f[0], f[1], f[2], f[3], f[4], f[5]);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_csv_string().as_bytes())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Reads a headered numeric CSV, returning rows ordered as `required`.
/// Columns listed in `optional` are tolerated and ignored; anything else
/// is rejected. Row numbers in errors count data rows from 1.
pub fn read_columns<R: Read>(
    reader: R,
    required: &[&str],
    optional: &[&str],
) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    let mut positions = Vec::with_capacity(required.len());
    for name in required {
        let pos = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| Error::Csv(format!("missing column `{name}`")))?;
        positions.push(pos);
    }
    if let Some(extra) = headers
        .iter()
        .find(|h| !required.contains(h) && !optional.contains(h))
    {
        return Err(Error::Csv(format!("unexpected column `{extra}`")));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Csv(format!("row {row}: {e}")))?;
        let mut values = Vec::with_capacity(required.len());
        for (&pos, name) in positions.iter().zip(required) {
            let raw = record.get(pos).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::Csv(format!("row {row}: `{name}` = {raw:?} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::Csv(format!("row {row}: `{name}` is not finite")));
            }
            values.push(v);
        }
        rows.push(values);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.70, validation: 0.15, test: 0.15 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid(format!("split ratios {parts:?} must be non-negative")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("split ratios sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Part sizes for `n` samples: train and validation are rounded, test
    /// takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let train = ((self.train * n as f64).round() as usize).min(n);
        let validation = ((self.validation * n as f64).round() as usize).min(n - train);
        (train, validation, n - train - validation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    pub ratios: SplitRatios,
    pub seed: u64,
}

/// Seeded Fisher–Yates shuffle of indices followed by a contiguous
/// train/validation/test partition.
pub fn split(dataset: &Dataset, ratios: SplitRatios, seed: u64) -> Result<DataSplit> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    ratios.validate()?;
    let n = dataset.len();
    if n < MIN_SPLIT_SAMPLES {
        return Err(Error::invalid(format!(
            "dataset has {n} samples, splitting needs at least {MIN_SPLIT_SAMPLES}"
        )));
    }
    let (n_train, n_val, n_test) = ratios.sizes(n);
    for (name, ratio, count) in [
        ("train", ratios.train, n_train),
        ("validation", ratios.validation, n_val),
        ("test", ratios.test, n_test),
    ] {
        if ratio > 0.0 && count == 0 {
            return Err(Error::invalid(format!(
                "{name} part would receive 0 of {n} samples"
            )));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(DataSplit {
        train: dataset.subset(&order[..n_train]),
        validation: dataset.subset(&order[n_train..n_train + n_val]),
        test: dataset.subset(&order[n_train + n_val..]),
        ratios,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("interval [{lo}, {hi}] is empty or non-finite")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval { lo: -1.0, hi: 1.0 }
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Inputs and targets after normalization, ready for a trainer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormalizedSet {
    pub inputs: Vec<[f64; INPUT_COUNT]>,
    pub targets: Vec<f64>,
}

impl NormalizedSet {
    pub fn new(inputs: Vec<[f64; INPUT_COUNT]>, targets: Vec<f64>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch { left: targets.len(), right: inputs.len() });
        }
        Ok(NormalizedSet { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Number of distinct input vectors (bitwise, with -0.0 folded into 0.0).
pub fn distinct_inputs(inputs: &[[f64; INPUT_COUNT]]) -> Vec<[f64; INPUT_COUNT]> {
    let mut seen = HashSet::new();
    inputs
        .iter()
        .filter(|x| seen.insert(x.map(|v| (v + 0.0).to_bits())))
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormalizerRepr", into = "NormalizerRepr")]
pub struct Normalizer {
    minimums: [f64; FEATURE_COUNT],
    maximums: [f64; FEATURE_COUNT],
    target_range: Interval,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizerRepr {
    minimums: [f64; FEATURE_COUNT],
    maximums: [f64; FEATURE_COUNT],
    target_range: Interval,
}

impl TryFrom<NormalizerRepr> for Normalizer {
    type Error = Error;
    fn try_from(r: NormalizerRepr) -> Result<Self> {
        Normalizer::from_extrema(r.minimums, r.maximums, r.target_range)
    }
}

impl From<Normalizer> for NormalizerRepr {
    fn from(n: Normalizer) -> Self {
        NormalizerRepr {
            minimums: n.minimums,
            maximums: n.maximums,
            target_range: n.target_range,
        }
    }
}

impl Normalizer {
    pub fn from_extrema(
        minimums: [f64; FEATURE_COUNT],
        maximums: [f64; FEATURE_COUNT],
        target_range: Interval,
    ) -> Result<Self> {
        for i in 0..FEATURE_COUNT {
            let (lo, hi) = (minimums[i], maximums[i]);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::invalid(format!(
                    "non-finite extrema for `{}`",
                    FEATURE_NAMES[i]
                )));
            }
            if hi <= lo {
                return Err(Error::ConstantFeature { feature: FEATURE_NAMES[i], value: lo });
            }
        }
        Ok(Normalizer { minimums, maximums, target_range })
    }

    /// Fits per-feature extrema on `train` only.
    pub fn fit(train: &Dataset, target_range: Interval) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("training partition"));
        }
        let mut minimums = [f64::INFINITY; FEATURE_COUNT];
        let mut maximums = [f64::NEG_INFINITY; FEATURE_COUNT];
        for s in train.iter() {
            for (i, v) in s.features().into_iter().enumerate() {
                minimums[i] = minimums[i].min(v);
                maximums[i] = maximums[i].max(v);
            }
        }
        Normalizer::from_extrema(minimums, maximums, target_range)
    }

    pub fn minimums(&self) -> &[f64; FEATURE_COUNT] {
        &self.minimums
    }

    pub fn maximums(&self) -> &[f64; FEATURE_COUNT] {
        &self.maximums
    }

    pub fn target_range(&self) -> Interval {
        self.target_range
    }

    pub fn normalize(&self, feature: usize, value: f64) -> f64 {
        let (lo, hi) = (self.target_range.lo, self.target_range.hi);
        let (min, max) = (self.minimums[feature], self.maximums[feature]);
        lo + (value - min) * (hi - lo) / (max - min)
    }

    pub fn denormalize(&self, feature: usize, value: f64) -> f64 {
        let (lo, hi) = (self.target_range.lo, self.target_range.hi);
        let (min, max) = (self.minimums[feature], self.maximums[feature]);
        min + (value - lo) * (max - min) / (hi - lo)
    }

    pub fn normalize_inputs(&self, inputs: &[f64; INPUT_COUNT]) -> [f64; INPUT_COUNT] {
        std::array::from_fn(|i| self.normalize(i, inputs[i]))
    }

    pub fn normalize_target(&self, value: f64) -> f64 {
        self.normalize(TARGET_INDEX, value)
    }

    pub fn invert_target(&self, value: f64) -> f64 {
        self.denormalize(TARGET_INDEX, value)
    }

    pub fn apply(&self, sample: &Sample) -> [f64; FEATURE_COUNT] {
        let f = sample.features();
        std::array::from_fn(|i| self.normalize(i, f[i]))
    }

    pub fn apply_dataset(&self, data: &Dataset) -> NormalizedSet {
        NormalizedSet {
            inputs: data.iter().map(|s| self.normalize_inputs(&s.inputs())).collect(),
            targets: data.iter().map(|s| self.normalize_target(s.hall_temp)).collect(),
        }
    }

    /// SHA-256 over the bit patterns of every stored extremum and the range.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for v in self
            .minimums
            .iter()
            .chain(&self.maximums)
            .chain([&self.target_range.lo, &self.target_range.hi])
        {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}
