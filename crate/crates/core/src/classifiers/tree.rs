//! CART classification trees grown on Gini impurity.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        probs: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes live in a flat arena; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub num_classes: usize,
    pub nodes: Vec<Node>,
}

struct Builder<'a, R> {
    data: &'a LabeledDataset,
    params: TreeParams,
    rng: Option<&'a mut R>,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// `n - Σ c²/n`: the Gini impurity scaled by the node size.
#[inline]
fn scaled_gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: usize = counts.iter().map(|&c| c * c).sum();
    n as f64 - sq as f64 / n as f64
}

impl<R: Rng> Builder<'_, R> {
    fn class_counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.data.num_classes()];
        for &i in idx {
            counts[self.data.labels()[i]] += 1;
        }
        counts
    }

    fn leaf(&mut self, counts: &[usize], n: usize) -> usize {
        let probs = counts.iter().map(|&c| c as f64 / n as f64).collect();
        self.nodes.push(Node::Leaf { probs });
        self.nodes.len() - 1
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let dim = self.data.dim();
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < dim => {
                let mut f = index::sample(rng, dim, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..dim).collect(),
        }
    }

    fn best_split(&mut self, idx: &[usize], counts: &[usize]) -> Option<SplitChoice> {
        let n = idx.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<SplitChoice> = None;
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
        for f in self.candidate_features() {
            order.clear();
            order.extend(idx.iter().map(|&i| (self.data.row(i)[f], self.data.labels()[i])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            if order[0].0 == order[n - 1].0 {
                continue;
            }
            let mut left = vec![0usize; counts.len()];
            let mut right = counts.to_vec();
            for p in 0..n - 1 {
                let label = order[p].1;
                left[label] += 1;
                right[label] -= 1;
                let nl = p + 1;
                let (lo, hi) = (order[p].0, order[p + 1].0);
                if lo == hi || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let score = scaled_gini(&left, nl) + scaled_gini(&right, n - nl);
                if best.as_ref().is_none_or(|b| score < b.score) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(SplitChoice {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let n = idx.len();
        let counts = self.class_counts(idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || n < 2 * self.params.min_leaf.max(1) {
            return self.leaf(&counts, n);
        }
        let Some(split) = self.best_split(idx, &counts) else {
            return self.leaf(&counts, n);
        };
        // Partition in place: rows at or below the threshold go left.
        let data = self.data;
        let mut mid = 0;
        for j in 0..n {
            if data.row(idx[j])[split.feature] <= split.threshold {
                idx.swap(mid, j);
                mid += 1;
            }
        }
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { probs: Vec::new() });
        let (l, r) = idx.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `rows` (repeats allowed, as in a bootstrap sample).
    pub fn fit_rows<R: Rng>(data: &LabeledDataset, rows: Vec<usize>, params: TreeParams, rng: Option<&mut R>) -> Self {
        let mut rows = rows;
        let mut b = Builder {
            data,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.grow(&mut rows, 0);
        DecisionTree {
            num_classes: data.num_classes(),
            nodes: b.nodes,
        }
    }

    pub fn fit(data: &LabeledDataset, params: TreeParams) -> Self {
        Self::fit_rows::<rand_chacha::ChaCha8Rng>(data, (0..data.len()).collect(), params, None)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { probs } => return probs.clone(),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
