//! The five base classifiers and their soft-voting ensemble.
//!
//! Every model answers [`TrainedModel::predict_proba`] with a probability
//! distribution over the classes it was trained on; [`TrainedModel::predict`]
//! takes the argmax with ties going to the lowest class index.

mod forest;
mod knn;
mod naive_bayes;
mod persist;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::RandomForest;
pub use knn::Knn;
pub use naive_bayes::{softmax, GaussianNb};
pub use persist::{
    load_model, read_model, save_ensemble_manifest, save_model, write_model, ENSEMBLE_FORMAT, MODEL_FORMAT,
    MODEL_FORMAT_VERSION,
};
pub use svm::{LinearSvm, SvmParams};
pub use tree::{DecisionTree, Node, TreeParams};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    RandomForest,
    DecisionTree,
    NaiveBayes,
    Knn,
    Svm,
    SoftVote,
}

impl ClassifierKind {
    /// The five base classifiers in ensemble member order.
    pub const BASE: [ClassifierKind; 5] = [
        ClassifierKind::RandomForest,
        ClassifierKind::DecisionTree,
        ClassifierKind::NaiveBayes,
        ClassifierKind::Knn,
        ClassifierKind::Svm,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::NaiveBayes => "naive_bayes",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Svm => "svm",
            ClassifierKind::SoftVote => "soft_vote",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "Random Forest",
            ClassifierKind::DecisionTree => "Decision Tree",
            ClassifierKind::NaiveBayes => "Naive Bayes",
            ClassifierKind::Knn => "K-NN",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::SoftVote => "Soft Voting",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "rf" | "random_forest" => ClassifierKind::RandomForest,
            "dt" | "decision_tree" => ClassifierKind::DecisionTree,
            "nb" | "naive_bayes" | "gaussian_nb" => ClassifierKind::NaiveBayes,
            "knn" | "k-nn" => ClassifierKind::Knn,
            "svm" | "linear_svm" => ClassifierKind::Svm,
            "vote" | "ensemble" | "soft_vote" => ClassifierKind::SoftVote,
            other => return Err(Error::Config(format!("unknown classifier {other:?}"))),
        })
    }
}

/// Features sampled per forest split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeatureFraction {
    /// `⌊√dim⌋`
    Sqrt,
    Fraction(f64),
}

impl FeatureFraction {
    pub fn count(&self, dim: usize) -> usize {
        let n = match self {
            FeatureFraction::Sqrt => (dim as f64).sqrt().floor() as usize,
            FeatureFraction::Fraction(f) => (f * dim as f64).round() as usize,
        };
        n.clamp(1, dim.max(1))
    }
}

impl fmt::Display for FeatureFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureFraction::Sqrt => f.write_str("sqrt"),
            FeatureFraction::Fraction(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for FeatureFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("sqrt") {
            return Ok(FeatureFraction::Sqrt);
        }
        let f: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad feature fraction {s:?}")))?;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Config(format!("feature fraction must be in (0, 1], got {f}")));
        }
        Ok(FeatureFraction::Fraction(f))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub knn_k: usize,
    pub nb_variance_floor: f64,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub forest_trees: usize,
    pub forest_feature_fraction: FeatureFraction,
    pub svm_epochs: usize,
    pub svm_learning_rate: f64,
    pub svm_regularization: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            knn_k: 5,
            nb_variance_floor: 1e-9,
            tree_max_depth: 20,
            tree_min_leaf: 2,
            forest_trees: 100,
            forest_feature_fraction: FeatureFraction::Sqrt,
            svm_epochs: 200,
            svm_learning_rate: 0.01,
            svm_regularization: 1e-4,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("knn_k", self.knn_k),
            ("tree_max_depth", self.tree_max_depth),
            ("tree_min_leaf", self.tree_min_leaf),
            ("forest_trees", self.forest_trees),
            ("svm_epochs", self.svm_epochs),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v < 1) {
            return Err(Error::Config(format!("{name} must be >= 1")));
        }
        let rates = [
            ("nb_variance_floor", self.nb_variance_floor),
            ("svm_learning_rate", self.svm_learning_rate),
            ("svm_regularization", self.svm_regularization),
        ];
        if let Some((name, v)) = rates.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(format!("{name} must be > 0, got {v}")));
        }
        Ok(())
    }

    fn tree_params(&self, max_features: Option<usize>) -> TreeParams {
        TreeParams {
            max_depth: self.tree_max_depth,
            min_leaf: self.tree_min_leaf,
            max_features,
        }
    }
}

/// A probability distribution over classes.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassProbabilities(pub Vec<f64>);

impl ClassProbabilities {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Index of the largest probability; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate().skip(1) {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Unweighted mean of member probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftVote {
    pub members: Vec<TrainedModel>,
}

impl SoftVote {
    pub fn new(members: Vec<TrainedModel>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Empty("soft vote needs at least one member".into()))?;
        for m in &members[1..] {
            if m.class_names != first.class_names {
                return Err(Error::ClassMismatch(format!(
                    "ensemble members disagree on classes: {:?} vs {:?}",
                    first.class_names, m.class_names
                )));
            }
            if m.dim != first.dim {
                return Err(Error::DimensionMismatch {
                    expected: first.dim,
                    actual: m.dim,
                });
            }
        }
        Ok(SoftVote { members })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Knn(Knn),
    GaussianNb(GaussianNb),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    LinearSvm(LinearSvm),
    SoftVote(SoftVote),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub class_names: Vec<String>,
    pub dim: usize,
    pub model: Model,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.model {
            Model::Knn(_) => ClassifierKind::Knn,
            Model::GaussianNb(_) => ClassifierKind::NaiveBayes,
            Model::DecisionTree(_) => ClassifierKind::DecisionTree,
            Model::RandomForest(_) => ClassifierKind::RandomForest,
            Model::LinearSvm(_) => ClassifierKind::Svm,
            Model::SoftVote(_) => ClassifierKind::SoftVote,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn from_members(members: Vec<TrainedModel>) -> Result<Self> {
        let vote = SoftVote::new(members)?;
        Ok(TrainedModel {
            class_names: vote.members[0].class_names.clone(),
            dim: vote.members[0].dim,
            model: Model::SoftVote(vote),
        })
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<ClassProbabilities> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let probs = match &self.model {
            Model::Knn(m) => m.predict_proba(x),
            Model::GaussianNb(m) => m.predict_proba(x),
            Model::DecisionTree(m) => m.predict_proba(x),
            Model::RandomForest(m) => m.predict_proba(x),
            Model::LinearSvm(m) => m.predict_proba(x),
            Model::SoftVote(v) => return soft_vote(&v.members, x),
        };
        Ok(ClassProbabilities(probs))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.predict_proba(x).map(|p| p.argmax())
    }

    /// Predicts every row of `data`, in parallel when enabled.
    pub fn predict_all(&self, data: &LabeledDataset) -> Result<Vec<usize>> {
        par::map_range(data.len(), |i| self.predict(data.row(i)))
            .into_iter()
            .collect()
    }
}

/// Mean of the members' class probabilities.
pub fn soft_vote(members: &[TrainedModel], x: &[f64]) -> Result<ClassProbabilities> {
    let first = members
        .first()
        .ok_or_else(|| Error::Empty("soft vote needs at least one member".into()))?;
    let mut acc = vec![0.0; first.num_classes()];
    for m in members {
        if m.class_names != first.class_names {
            return Err(Error::ClassMismatch(format!(
                "ensemble members disagree on classes: {:?} vs {:?}",
                first.class_names, m.class_names
            )));
        }
        let p = m.predict_proba(x)?;
        acc.iter_mut().zip(p.as_slice()).for_each(|(a, v)| *a += v);
    }
    let n = members.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(ClassProbabilities(acc))
}

fn check_trainable(data: &LabeledDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Empty("training set has no samples".into()));
    }
    if data.dim() == 0 {
        return Err(Error::Dataset("training features have zero dimensions".into()));
    }
    data.require_all_classes()
}

/// Fits one classifier. `SoftVote` fits all five base classifiers and averages them.
pub fn fit(kind: ClassifierKind, data: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    check_trainable(data)?;
    let model = match kind {
        ClassifierKind::Knn => Model::Knn(Knn::fit(data, cfg.knn_k)),
        ClassifierKind::NaiveBayes => Model::GaussianNb(GaussianNb::fit(data, cfg.nb_variance_floor)),
        ClassifierKind::DecisionTree => Model::DecisionTree(DecisionTree::fit(data, cfg.tree_params(None))),
        ClassifierKind::RandomForest => {
            let m = cfg.forest_feature_fraction.count(data.dim());
            Model::RandomForest(RandomForest::fit(
                data,
                cfg.forest_trees,
                cfg.tree_params(Some(m)),
                cfg.seed,
            ))
        }
        ClassifierKind::Svm => Model::LinearSvm(LinearSvm::fit(
            data,
            SvmParams {
                epochs: cfg.svm_epochs,
                learning_rate: cfg.svm_learning_rate,
                regularization: cfg.svm_regularization,
                seed: cfg.seed,
            },
        )),
        ClassifierKind::SoftVote => {
            let members = fit_many(&ClassifierKind::BASE, data, cfg)?;
            return TrainedModel::from_members(members);
        }
    };
    Ok(TrainedModel {
        class_names: data.class_names().to_vec(),
        dim: data.dim(),
        model,
    })
}

/// Fits several classifiers, one per worker; output order follows `kinds`.
pub fn fit_many(kinds: &[ClassifierKind], data: &LabeledDataset, cfg: &TrainConfig) -> Result<Vec<TrainedModel>> {
    par::map(kinds, |&k| fit(k, data, cfg)).into_iter().collect()
}
