//! Linear SVM trained by stochastic subgradient descent on the regularized
//! hinge objective, with the Pegasos step schedule `1 / (lambda * t)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{FeatureVector, FEATURE_DIM};
use super::ClassifyError;

/// Value of the implicit bias input. The bias is learned as one more
/// weight on a constant feature.
const BIAS_INPUT: f64 = 1.0;
/// Below this the lazy scale is folded back into the weights.
const MIN_SCALE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub lambda: f64,
    pub epochs: u32,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 20,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Non-zero weights sorted by feature index.
    pub weights: Vec<(u32, f64)>,
    pub bias: f64,
    /// SHA-256 over the training examples.
    pub trained_on: String,
    pub hyperparameters: Hyperparameters,
}

impl LinearModel {
    pub fn weight(&self, index: u32) -> f64 {
        self.weights
            .binary_search_by_key(&index, |p| p.0)
            .map_or(0.0, |i| self.weights[i].1)
    }

    pub fn norm_sq(&self) -> f64 {
        self.weights.iter().map(|p| p.1 * p.1).sum()
    }
}

/// `w · x + b`.
pub fn predict_margin(model: &LinearModel, x: &FeatureVector) -> f64 {
    x.iter().map(|(i, v)| model.weight(i) * v).sum::<f64>() + model.bias
}

fn hinge(margin: f64, label: bool) -> f64 {
    let y = if label { 1.0 } else { -1.0 };
    (1.0 - y * margin).max(0.0)
}

/// `lambda / 2 * |w|^2 + mean hinge loss` (bias not regularized).
pub fn objective(model: &LinearModel, data: &[(FeatureVector, bool)]) -> f64 {
    let mean_hinge = data
        .iter()
        .map(|(x, y)| hinge(predict_margin(model, x), *y))
        .sum::<f64>()
        / data.len().max(1) as f64;
    model.hyperparameters.lambda / 2.0 * model.norm_sq() + mean_hinge
}

pub fn dataset_fingerprint(data: &[(FeatureVector, bool)]) -> String {
    let mut h = Sha256::new();
    h.update((data.len() as u64).to_le_bytes());
    for (x, y) in data {
        h.update([u8::from(*y)]);
        for (i, v) in x.iter() {
            h.update(i.to_le_bytes());
            h.update(v.to_bits().to_le_bytes());
        }
        h.update(u32::MAX.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Weight vector stored as `scale * raw` so the per-step shrink is O(1).
struct ScaledWeights {
    raw: Vec<f64>,
    raw_bias: f64,
    scale: f64,
    raw_norm_sq: f64,
}

impl ScaledWeights {
    fn new() -> Self {
        Self {
            raw: vec![0.0; FEATURE_DIM],
            raw_bias: 0.0,
            scale: 1.0,
            raw_norm_sq: 0.0,
        }
    }

    fn raw_dot(&self, x: &FeatureVector) -> f64 {
        x.dot_dense(&self.raw) + self.raw_bias * BIAS_INPUT
    }

    fn margin(&self, x: &FeatureVector) -> f64 {
        self.scale * self.raw_dot(x)
    }

    fn clear(&mut self) {
        self.raw.iter_mut().for_each(|w| *w = 0.0);
        self.raw_bias = 0.0;
        self.scale = 1.0;
        self.raw_norm_sq = 0.0;
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.clear();
            return;
        }
        self.scale *= factor;
        if self.scale < MIN_SCALE {
            let s = self.scale;
            self.raw.iter_mut().for_each(|w| *w *= s);
            self.raw_bias *= s;
            self.raw_norm_sq *= s * s;
            self.scale = 1.0;
        }
    }

    /// `w += step * x` (bias input included).
    fn add(&mut self, x: &FeatureVector, x_norm_sq: f64, step: f64) {
        let k = step / self.scale;
        let cross = self.raw_dot(x);
        for (i, v) in x.iter() {
            self.raw[i as usize] += k * v;
        }
        self.raw_bias += k * BIAS_INPUT;
        self.raw_norm_sq += 2.0 * k * cross + k * k * (x_norm_sq + BIAS_INPUT * BIAS_INPUT);
        self.raw_norm_sq = self.raw_norm_sq.max(0.0);
    }

    fn norm(&self) -> f64 {
        self.scale * self.raw_norm_sq.sqrt()
    }

    fn to_model(&self, trained_on: String, hyperparameters: Hyperparameters) -> LinearModel {
        let weights = self
            .raw
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, w)| (i as u32, w * self.scale))
            .collect();
        LinearModel {
            weights,
            bias: self.raw_bias * self.scale,
            trained_on,
            hyperparameters,
        }
    }
}

pub fn train_linear_svm(
    data: &[(FeatureVector, bool)],
    hp: &Hyperparameters,
) -> Result<LinearModel, ClassifyError> {
    train_linear_svm_traced(data, hp).map(|(m, _)| m)
}

/// Trains and also returns the objective measured after every epoch.
pub fn train_linear_svm_traced(
    data: &[(FeatureVector, bool)],
    hp: &Hyperparameters,
) -> Result<(LinearModel, Vec<f64>), ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::NoData);
    }
    if data.iter().all(|d| d.1) || data.iter().all(|d| !d.1) {
        return Err(ClassifyError::SingleClassData);
    }
    if !(hp.lambda > 0.0 && hp.lambda.is_finite()) || hp.epochs == 0 {
        return Err(ClassifyError::BadHyperparameters(format!(
            "lambda={} epochs={}",
            hp.lambda, hp.epochs
        )));
    }
    if data.iter().any(|(x, _)| !x.is_finite()) {
        return Err(ClassifyError::NonFiniteFeature);
    }

    let fingerprint = dataset_fingerprint(data);
    let norms: Vec<f64> = data.iter().map(|(x, _)| x.norm_sq()).collect();
    let radius = 1.0 / hp.lambda.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut w = ScaledWeights::new();
    let mut trace = Vec::with_capacity(hp.epochs as usize);
    let mut t: u64 = 0;

    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let (x, label) = &data[i];
            let y = if *label { 1.0 } else { -1.0 };
            let eta = 1.0 / (hp.lambda * t as f64);
            let violated = y * w.margin(x) < 1.0;
            w.shrink(1.0 - 1.0 / t as f64);
            if violated {
                w.add(x, norms[i], eta * y);
            }
            let norm = w.norm();
            if norm > radius {
                w.shrink(radius / norm);
            }
        }
        let snapshot = w.to_model(fingerprint.clone(), *hp);
        trace.push(objective(&snapshot, data));
    }
    Ok((w.to_model(fingerprint, *hp), trace))
}
