//! Gaussian radial-basis-function network.
//!
//! Training is non-iterative: pick centers (k-means++ seeded Lloyd, or a
//! random subset of training inputs), derive one shared spread, then solve
//! the linear output layer in closed form with an unpenalized bias column.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{distinct_inputs, NormalizedSet, INPUT_COUNT};
use crate::linalg::{lstsq, Matrix};
use crate::{Error, Predictor, Result};

pub type Point = [f64; INPUT_COUNT];

/// Centers closer than this are treated as coincident.
pub const MIN_CENTER_DISTANCE: f64 = 1e-9;

fn squared_distance(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    centers: Vec<Point>,
    spread: f64,
    weights: Vec<f64>,
    bias: f64,
}

impl RbfModel {
    pub fn new(centers: Vec<Point>, spread: f64, weights: Vec<f64>, bias: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::invalid("an RBF network needs at least one center"));
        }
        if weights.len() != centers.len() {
            return Err(Error::invalid(format!(
                "{} output weights for {} centers",
                weights.len(),
                centers.len()
            )));
        }
        if !(spread.is_finite() && spread > 0.0) {
            return Err(Error::invalid(format!("spread {spread} must be positive")));
        }
        let finite = centers.iter().flatten().chain(&weights).chain([&bias]).all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("RBF parameters must be finite"));
        }
        ensure_distinct(&centers)?;
        Ok(RbfModel { centers, spread, weights, bias })
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn neurons(&self) -> usize {
        self.centers.len()
    }

    /// `φ_k = exp(−‖x − c_k‖² / 2σ²)` for every center.
    pub fn activations(&self, x: &Point) -> Result<Vec<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("RBF input is not finite"));
        }
        Ok(gaussian_row(&self.centers, self.spread, x))
    }

    pub fn predict(&self, x: &Point) -> Result<f64> {
        let phi = self.activations(x)?;
        Ok(phi.iter().zip(&self.weights).map(|(p, w)| p * w).sum::<f64>() + self.bias)
    }
}

impl Predictor for RbfModel {
    fn predict_normalized(&self, inputs: &Point) -> Result<f64> {
        self.predict(inputs)
    }
}

fn gaussian_row(centers: &[Point], spread: f64, x: &Point) -> Vec<f64> {
    let denom = 2.0 * spread * spread;
    centers.iter().map(|c| (-squared_distance(x, c) / denom).exp()).collect()
}

fn ensure_distinct(centers: &[Point]) -> Result<()> {
    let min_sq = MIN_CENTER_DISTANCE * MIN_CENTER_DISTANCE;
    for (i, a) in centers.iter().enumerate() {
        for (j, b) in centers.iter().enumerate().skip(i + 1) {
            if squared_distance(a, b) <= min_sq {
                return Err(Error::invalid(format!("centers {i} and {j} coincide")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMethod {
    Kmeans,
    RandomSubset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadRule {
    MaxDistHeuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbfTrainConfig {
    pub neurons: usize,
    pub center_method: CenterMethod,
    pub kmeans_max_iters: usize,
    pub ridge: f64,
    pub spread_rule: SpreadRule,
    pub seed: u64,
}

impl Default for RbfTrainConfig {
    fn default() -> Self {
        RbfTrainConfig {
            neurons: 20,
            center_method: CenterMethod::Kmeans,
            kmeans_max_iters: 100,
            ridge: 1e-8,
            spread_rule: SpreadRule::MaxDistHeuristic,
            seed: 0,
        }
    }
}

impl RbfTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.neurons == 0 {
            return Err(Error::invalid("rbf.neurons must be at least 1"));
        }
        if self.kmeans_max_iters == 0 {
            return Err(Error::invalid("rbf.kmeans_max_iters must be at least 1"));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::invalid("rbf.ridge must be non-negative"));
        }
        if let SpreadRule::Fixed(s) = self.spread_rule {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid("rbf.spread_rule fixed spread must be positive"));
            }
        }
        Ok(())
    }
}

/// Chooses `config.neurons` pairwise-distinct centers from `inputs`.
pub fn select_centers(inputs: &[Point], config: &RbfTrainConfig) -> Result<Vec<Point>> {
    config.validate()?;
    let k = config.neurons;
    if k > inputs.len() {
        return Err(Error::invalid(format!(
            "{k} centers requested but the training partition has only {} samples",
            inputs.len()
        )));
    }
    let distinct = distinct_inputs(inputs);
    if k > distinct.len() {
        return Err(Error::invalid(format!(
            "{k} centers requested but the training partition has only {} distinct inputs",
            distinct.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let centers = match config.center_method {
        CenterMethod::RandomSubset => rand::seq::index::sample(&mut rng, distinct.len(), k)
            .into_iter()
            .map(|i| distinct[i])
            .collect(),
        CenterMethod::Kmeans => kmeans(inputs, k, config.kmeans_max_iters, &mut rng),
    };
    ensure_distinct(&centers)?;
    Ok(centers)
}

/// k-means++ seeding: the first center uniformly, each further one with
/// probability proportional to the squared distance to its nearest center.
pub fn kmeans_plus_plus<R: Rng + ?Sized>(points: &[Point], k: usize, rng: &mut R) -> Vec<Point> {
    let mut centers = Vec::with_capacity(k);
    if k == 0 || points.is_empty() {
        return centers;
    }
    centers.push(points[rng.random_range(0..points.len())]);
    let mut nearest: Vec<f64> = points.iter().map(|p| squared_distance(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = None;
        for (i, d) in nearest.iter().enumerate() {
            if *d > 0.0 {
                chosen = Some(i);
                if target < *d {
                    break;
                }
                target -= d;
            }
        }
        let c = points[chosen.expect("total > 0 implies a positive weight")];
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest_center(p: &Point, centers: &[Point]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, c) in centers.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Lloyd iterations from a k-means++ start until the assignment stops
/// changing or `max_iters` is reached. Empty clusters keep their center.
pub fn kmeans<R: Rng + ?Sized>(points: &[Point], k: usize, max_iters: usize, rng: &mut R) -> Vec<Point> {
    let mut centers = kmeans_plus_plus(points, k, rng);
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
    for _ in 0..max_iters {
        let mut sums = vec![[0.0; INPUT_COUNT]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (p, &a) in points.iter().zip(&assignment) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for ((c, s), &n) in centers.iter_mut().zip(&sums).zip(&counts) {
            if n > 0 {
                *c = s.map(|v| v / n as f64);
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    centers
}

/// `d_max / √(2K)` over pairwise center distances; 1.0 for a single center.
pub fn spread_from_centers(centers: &[Point]) -> f64 {
    if centers.len() < 2 {
        return 1.0;
    }
    let mut d_max_sq = 0.0f64;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            d_max_sq = d_max_sq.max(squared_distance(a, b));
        }
    }
    d_max_sq.sqrt() / (2.0 * centers.len() as f64).sqrt()
}

/// N×(K+1) matrix of activations with a trailing column of ones.
pub fn design_matrix(centers: &[Point], spread: f64, inputs: &[Point]) -> Matrix {
    let k = centers.len();
    let mut phi = Matrix::zeros(inputs.len(), k + 1);
    for (i, x) in inputs.iter().enumerate() {
        for (j, v) in gaussian_row(centers, spread, x).into_iter().enumerate() {
            phi[(i, j)] = v;
        }
        phi[(i, k)] = 1.0;
    }
    phi
}

/// Minimizes `‖Φβ − t‖² + λ‖w‖²` where β = (w, bias) and the last column of
/// Φ is the bias column. For λ > 0 the penalty enters as √λ·I rows appended
/// below Φ (zero under the bias column).
pub fn solve_weights(phi: &Matrix, targets: &[f64], ridge: f64) -> Result<(Vec<f64>, f64)> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::invalid("ridge penalty must be non-negative"));
    }
    if phi.cols() < 2 {
        return Err(Error::invalid("design matrix needs at least one basis column and the bias"));
    }
    let k = phi.cols() - 1;
    let beta = if ridge > 0.0 {
        let n = phi.rows();
        let mut data = phi.as_slice().to_vec();
        data.resize((n + k) * (k + 1), 0.0);
        let root = ridge.sqrt();
        for j in 0..k {
            data[(n + j) * (k + 1) + j] = root;
        }
        let aug = Matrix::from_row_major(n + k, k + 1, data)?;
        let mut rhs = targets.to_vec();
        if rhs.len() != n {
            return Err(Error::LengthMismatch { left: rhs.len(), right: n });
        }
        rhs.resize(n + k, 0.0);
        lstsq(&aug, &rhs)?
    } else {
        lstsq(phi, targets)?
    };
    Ok((beta[..k].to_vec(), beta[k]))
}

/// Centers, spread, then the closed-form output layer.
pub fn train(config: &RbfTrainConfig, train: &NormalizedSet) -> Result<RbfModel> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training partition"));
    }
    let centers = select_centers(&train.inputs, config)?;
    let spread = match config.spread_rule {
        SpreadRule::MaxDistHeuristic => spread_from_centers(&centers),
        SpreadRule::Fixed(s) => s,
    };
    let phi = design_matrix(&centers, spread, &train.inputs);
    let (weights, bias) = solve_weights(&phi, &train.targets, config.ridge)?;
    RbfModel::new(centers, spread, weights, bias)
}
