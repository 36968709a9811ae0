use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;

/// Lazy k-nearest-neighbor classifier over Euclidean distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub num_classes: usize,
    pub dim: usize,
    pub points: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Knn {
    pub fn fit(data: &LabeledDataset, k: usize) -> Self {
        Knn {
            k,
            num_classes: data.num_classes(),
            dim: data.dim(),
            points: data.rows().flatten().copied().collect(),
            labels: data.labels().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Indices of the `k` nearest stored points; equal distances go to the lower index.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let mut dists: Vec<(f64, usize)> = (0..self.len())
            .map(|i| {
                let d: f64 = self.point(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let k = self.k.min(dists.len());
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dists.len() {
            dists.select_nth_unstable_by(k, by_dist);
            dists.truncate(k);
        }
        dists.sort_by(by_dist);
        dists.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let nn = self.neighbors(x);
        let mut votes = vec![0.0; self.num_classes];
        for &i in &nn {
            votes[self.labels[i]] += 1.0;
        }
        let k = nn.len() as f64;
        votes.iter_mut().for_each(|v| *v /= k);
        votes
    }
}
