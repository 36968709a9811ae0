use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::dataset::LabeledDataset;
use crate::par;

/// Bagged CART trees with per-split feature subsampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub seed: u64,
    pub num_classes: usize,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws from its own generator seeded with `seed + t`, so the
    /// forest is identical whatever the thread count.
    pub fn fit(data: &LabeledDataset, num_trees: usize, params: TreeParams, seed: u64) -> Self {
        let n = data.len();
        let trees = par::map_range(num_trees, |t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            DecisionTree::fit_rows(data, rows, params, Some(&mut rng))
        });
        RandomForest {
            seed,
            num_classes: data.num_classes(),
            trees,
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.predict_proba(x)) {
                *a += p;
            }
        }
        let m = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= m);
        acc
    }
}
