use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;

/// Gaussian naive Bayes with per-class, per-feature means and floored variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub log_priors: Vec<f64>,
}

impl GaussianNb {
    /// Every class must have at least one sample.
    pub fn fit(data: &LabeledDataset, variance_floor: f64) -> Self {
        let (k, d) = (data.num_classes(), data.dim());
        let counts = data.class_counts();
        let mut means = vec![vec![0.0; d]; k];
        for (row, &l) in data.rows().zip(data.labels()) {
            for (m, &v) in means[l].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &n) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= n as f64);
        }
        let mut variances = vec![vec![0.0; d]; k];
        for (row, &l) in data.rows().zip(data.labels()) {
            for ((s, &v), &m) in variances[l].iter_mut().zip(row).zip(&means[l]) {
                *s += (v - m) * (v - m);
            }
        }
        for (var, &n) in variances.iter_mut().zip(&counts) {
            var.iter_mut().for_each(|v| *v = (*v / n as f64).max(variance_floor));
        }
        let total = data.len() as f64;
        let log_priors = counts.iter().map(|&n| (n as f64 / total).ln()).collect();
        GaussianNb {
            means,
            variances,
            log_priors,
        }
    }

    /// Unnormalized log posterior per class.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        const LN_2PI: f64 = 1.837_877_066_409_345_5;
        self.means
            .iter()
            .zip(&self.variances)
            .zip(&self.log_priors)
            .map(|((mean, var), &prior)| {
                let ll: f64 = x
                    .iter()
                    .zip(mean)
                    .zip(var)
                    .map(|((&v, &m), &s)| -0.5 * (LN_2PI + s.ln() + (v - m) * (v - m) / s))
                    .sum();
                prior + ll
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.joint_log_likelihood(x))
    }
}

/// Numerically stable softmax; shifts by the maximum before exponentiating.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stores_log_priors() {
        let ds = LabeledDataset::new(
            vec![vec![0.0], vec![0.1], vec![0.2], vec![1.0]],
            vec![0, 0, 0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let m = GaussianNb::fit(&ds, 1e-9);
        assert_eq!(m.log_priors[0], 0.75f64.ln());
        assert_eq!(m.log_priors[1], 0.25f64.ln());
        assert!((m.means[0][0] - 0.1).abs() < 1e-15);
        assert_eq!(m.variances[1][0], 1e-9);
    }

    #[test]
    fn symmetric_classes_give_uniform() {
        let ds = LabeledDataset::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0, 0, 1, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let m = GaussianNb::fit(&ds, 1e-9);
        assert_eq!(m.predict_proba(&[0.3, 0.9]), vec![0.5, 0.5]);
    }

    #[test]
    fn extreme_inputs_stay_finite() {
        let ds = LabeledDataset::new(
            vec![vec![0.0; 256], vec![0.0; 256], vec![1.0; 256], vec![1.0; 256]],
            vec![0, 0, 1, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let m = GaussianNb::fit(&ds, 1e-9);
        let mut probe = vec![0.0; 256];
        probe[..128].iter_mut().for_each(|v| *v = 1.0);
        for x in [vec![0.5; 256], probe, vec![1.0; 256]] {
            let p = m.predict_proba(&x);
            assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0), "{p:?}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = softmax(&[1.0, 2.0, 3.0]);
        let b = softmax(&[-1e6 + 1.0, -1e6 + 2.0, -1e6 + 3.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
