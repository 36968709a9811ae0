//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! dataset.root = data/ct
//! albp.beta = 0.1
//! clahe.tiles = 8x8
//! classifiers = rf,dt,nb,knn,svm
//! ```
//!
//! Command-line flags override file values key by key.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifiers::{ClassifierKind, FeatureFraction, TrainConfig};
use crate::descriptors::{AlbpConfig, Descriptor};
use crate::error::{Error, Result};
use crate::eval::SplitConfig;
use crate::preprocess::PreprocessConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescriptorChoice {
    Lbp,
    Albp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Pgm,
}

impl ImageFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Pgm => "pgm",
        }
    }
}

/// One descriptor configuration to extract, train and evaluate.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorRun {
    /// Directory name under the output directory.
    pub tag: String,
    /// Name shown in reports.
    pub label: String,
    pub descriptor: Descriptor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub preprocess: PreprocessConfig,
    pub image_format: ImageFormat,
    pub descriptors: Vec<DescriptorChoice>,
    pub albp: AlbpConfig,
    pub beta_sweep: Vec<f64>,
    pub classifiers: Vec<ClassifierKind>,
    pub ensemble: bool,
    pub train: TrainConfig,
    pub split: SplitConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            out_dir: PathBuf::from("out"),
            threads: 0,
            preprocess: PreprocessConfig::default(),
            image_format: ImageFormat::Png,
            descriptors: vec![DescriptorChoice::Lbp, DescriptorChoice::Albp],
            albp: AlbpConfig::default(),
            beta_sweep: Vec::new(),
            classifiers: ClassifierKind::BASE.to_vec(),
            ensemble: true,
            train: TrainConfig::default(),
            split: SplitConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_beta_list(key: &str, value: &str) -> Result<Vec<f64>> {
    list(value)
        .map(|b| {
            let beta: f64 = parse(key, b)?;
            AlbpConfig::new(beta)?;
            Ok(beta)
        })
        .collect()
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "dataset.root",
        "output.dir",
        "threads",
        "seed",
        "crop.enabled",
        "crop.threshold",
        "resize.width",
        "resize.height",
        "clahe.enabled",
        "clahe.tiles",
        "clahe.clip",
        "preprocess.format",
        "descriptor",
        "albp.beta",
        "albp.beta_sweep",
        "classifiers",
        "ensemble",
        "knn.k",
        "nb.variance_floor",
        "tree.max_depth",
        "tree.min_leaf",
        "forest.trees",
        "forest.feature_fraction",
        "svm.epochs",
        "svm.learning_rate",
        "svm.regularization",
        "split.train_fraction",
        "split.stratified",
    ];

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset.root" => self.dataset = (!value.is_empty()).then(|| PathBuf::from(value)),
            "output.dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = parse(key, value)?,
            "seed" => {
                let seed: u64 = parse(key, value)?;
                self.train.seed = seed;
                self.split.seed = seed;
            }
            "crop.enabled" => self.preprocess.enable_crop = parse_bool(key, value)?,
            "crop.threshold" => self.preprocess.crop_threshold = parse(key, value)?,
            "resize.width" => self.preprocess.target_width = parse(key, value)?,
            "resize.height" => self.preprocess.target_height = parse(key, value)?,
            "clahe.enabled" => self.preprocess.enable_clahe = parse_bool(key, value)?,
            "clahe.tiles" => {
                let (c, r) = match value.to_ascii_lowercase().split_once('x') {
                    Some((c, r)) => (parse(key, c)?, parse(key, r)?),
                    None => {
                        let n = parse(key, value)?;
                        (n, n)
                    }
                };
                self.preprocess.clahe.tile_cols = c;
                self.preprocess.clahe.tile_rows = r;
            }
            "clahe.clip" => self.preprocess.clahe.clip_limit = parse(key, value)?,
            "preprocess.format" => {
                self.image_format = match value.to_ascii_lowercase().as_str() {
                    "png" => ImageFormat::Png,
                    "pgm" => ImageFormat::Pgm,
                    _ => return Err(Error::Config(format!("{key}: expected png or pgm, got {value:?}"))),
                }
            }
            "descriptor" => {
                let mut choices = Vec::new();
                for d in list(value) {
                    match d.to_ascii_lowercase().as_str() {
                        "lbp" => choices.push(DescriptorChoice::Lbp),
                        "albp" | "a-lbp" => choices.push(DescriptorChoice::Albp),
                        "both" => choices.extend([DescriptorChoice::Lbp, DescriptorChoice::Albp]),
                        _ => return Err(Error::Config(format!("{key}: unknown descriptor {d:?}"))),
                    }
                }
                choices.dedup();
                self.descriptors = choices;
            }
            "albp.beta" => self.albp = AlbpConfig::new(parse(key, value)?)?,
            "albp.beta_sweep" => self.beta_sweep = parse_beta_list(key, value)?,
            "classifiers" => {
                let mut kinds = Vec::new();
                for c in list(value) {
                    let k: ClassifierKind = c.parse()?;
                    if k == ClassifierKind::SoftVote {
                        self.ensemble = true;
                    } else if !kinds.contains(&k) {
                        kinds.push(k);
                    }
                }
                kinds.sort();
                self.classifiers = kinds;
            }
            "ensemble" => self.ensemble = parse_bool(key, value)?,
            "knn.k" => self.train.knn_k = parse(key, value)?,
            "nb.variance_floor" => self.train.nb_variance_floor = parse(key, value)?,
            "tree.max_depth" => self.train.tree_max_depth = parse(key, value)?,
            "tree.min_leaf" => self.train.tree_min_leaf = parse(key, value)?,
            "forest.trees" => self.train.forest_trees = parse(key, value)?,
            "forest.feature_fraction" => self.train.forest_feature_fraction = value.parse::<FeatureFraction>()?,
            "svm.epochs" => self.train.svm_epochs = parse(key, value)?,
            "svm.learning_rate" => self.train.svm_learning_rate = parse(key, value)?,
            "svm.regularization" => self.train.svm_regularization = parse(key, value)?,
            "split.train_fraction" => self.split.train_fraction = parse(key, value)?,
            "split.stratified" => self.split.stratified = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.albp.validate()?;
        self.train.validate()?;
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split.train_fraction must be in (0, 1), got {}",
                self.split.train_fraction
            )));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("at least one classifier must be selected".into()));
        }
        if self.descriptors.is_empty() {
            return Err(Error::Config("at least one descriptor must be selected".into()));
        }
        Ok(())
    }

    /// Classifiers to train, base models first and the ensemble (when enabled) last.
    pub fn model_kinds(&self) -> Vec<ClassifierKind> {
        let mut kinds = self.classifiers.clone();
        if self.ensemble {
            kinds.push(ClassifierKind::SoftVote);
        }
        kinds
    }

    pub fn descriptor_runs(&self) -> Vec<DescriptorRun> {
        let mut runs = Vec::new();
        for choice in &self.descriptors {
            match choice {
                DescriptorChoice::Lbp => runs.push(DescriptorRun {
                    tag: "lbp".into(),
                    label: "LBP".into(),
                    descriptor: Descriptor::Lbp,
                }),
                DescriptorChoice::Albp if self.beta_sweep.is_empty() => runs.push(DescriptorRun {
                    tag: "albp".into(),
                    label: "ALBP".into(),
                    descriptor: Descriptor::Albp(self.albp),
                }),
                DescriptorChoice::Albp => {
                    for &beta in &self.beta_sweep {
                        runs.push(DescriptorRun {
                            tag: format!("albp-b{beta}"),
                            label: format!("ALBP(beta={beta})"),
                            descriptor: Descriptor::Albp(AlbpConfig { beta }),
                        });
                    }
                }
            }
        }
        runs
    }

    /// Every key with its effective value, in [`RunConfig::KEYS`] order.
    /// Feeding these pairs back through [`RunConfig::set`] reproduces the config.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let p = &self.preprocess;
        let t = &self.train;
        let join = |v: Vec<String>| v.join(",");
        let values: Vec<String> = vec![
            self.dataset
                .as_ref()
                .map(|d| d.display().to_string())
                .unwrap_or_default(),
            self.out_dir.display().to_string(),
            self.threads.to_string(),
            t.seed.to_string(),
            p.enable_crop.to_string(),
            p.crop_threshold.to_string(),
            p.target_width.to_string(),
            p.target_height.to_string(),
            p.enable_clahe.to_string(),
            format!("{}x{}", p.clahe.tile_cols, p.clahe.tile_rows),
            p.clahe.clip_limit.to_string(),
            self.image_format.extension().to_string(),
            join(
                self.descriptors
                    .iter()
                    .map(|d| match d {
                        DescriptorChoice::Lbp => "lbp".to_string(),
                        DescriptorChoice::Albp => "albp".to_string(),
                    })
                    .collect(),
            ),
            self.albp.beta.to_string(),
            join(self.beta_sweep.iter().map(f64::to_string).collect()),
            join(self.classifiers.iter().map(|k| k.id().to_string()).collect()),
            self.ensemble.to_string(),
            t.knn_k.to_string(),
            t.nb_variance_floor.to_string(),
            t.tree_max_depth.to_string(),
            t.tree_min_leaf.to_string(),
            t.forest_trees.to_string(),
            t.forest_feature_fraction.to_string(),
            t.svm_epochs.to_string(),
            t.svm_learning_rate.to_string(),
            t.svm_regularization.to_string(),
            self.split.train_fraction.to_string(),
            self.split.stratified.to_string(),
        ];
        Self::KEYS.iter().zip(values).map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
