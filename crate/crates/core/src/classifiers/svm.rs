//! One-vs-rest linear SVM trained by hinge-loss subgradient descent.
//!
//! Inputs are standardized per feature with statistics from the training set
//! (histogram bins differ in scale by orders of magnitude). Class
//! probabilities are a softmax over the per-class margins.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::naive_bayes::softmax;
use crate::dataset::LabeledDataset;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub temperature: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearSvm {
    pub fn fit(data: &LabeledDataset, params: SvmParams) -> Self {
        let (n, d) = (data.len(), data.dim());
        let mut mean = vec![0.0; d];
        for row in data.rows() {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut scale = vec![0.0; d];
        for row in data.rows() {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        scale.iter_mut().for_each(|s| {
            let sd = (*s / n as f64).sqrt();
            *s = if sd > 1e-12 { sd } else { 1.0 };
        });
        let xs: Vec<Vec<f64>> = data
            .rows()
            .map(|row| {
                row.iter()
                    .zip(&mean)
                    .zip(&scale)
                    .map(|((v, m), s)| (v - m) / s)
                    .collect()
            })
            .collect();

        // Every class sees the same sample order, so the result does not
        // depend on how the classes are scheduled.
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut order: Vec<usize> = (0..n).collect();
        let orders: Vec<Vec<usize>> = (0..params.epochs)
            .map(|_| {
                order.shuffle(&mut rng);
                order.clone()
            })
            .collect();

        let fitted = par::map_range(data.num_classes(), |class| {
            let mut w = vec![0.0; d];
            let mut b = 0.0;
            let shrink = 1.0 - params.learning_rate * params.regularization;
            for epoch in &orders {
                for &i in epoch {
                    let y = if data.labels()[i] == class { 1.0 } else { -1.0 };
                    let x = &xs[i];
                    let margin = y * (dot(&w, x) + b);
                    w.iter_mut().for_each(|wj| *wj *= shrink);
                    if margin < 1.0 {
                        let step = params.learning_rate * y;
                        w.iter_mut().zip(x).for_each(|(wj, xj)| *wj += step * xj);
                        b += step;
                    }
                }
            }
            (w, b)
        });
        let (weights, biases) = fitted.into_iter().unzip();
        LinearSvm {
            feature_mean: mean,
            feature_scale: scale,
            weights,
            biases,
            temperature: 1.0,
        }
    }

    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x
            .iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect();
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| dot(w, &z) + b)
            .collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = self.margins(x).into_iter().map(|m| m / self.temperature).collect();
        softmax(&scaled)
    }
}
