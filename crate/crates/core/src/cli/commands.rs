//! Pipeline stages behind the command-line subcommands.
//!
//! Output layout under the configured output directory:
//!
//! ```text
//! preprocessed/<class>/<stem>.<png|pgm>
//! <tag>/features.csv
//! <tag>/split.json
//! <tag>/models/<classifier>.json, ensemble.json, train.log
//! <tag>/reports/<classifier>.json, <classifier>.txt
//! comparison.txt, comparison.json, run_manifest.json
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde_json::json;

use super::config::{DescriptorRun, RunConfig};
use super::features::{read_features_csv, rows_to_dataset, write_features_csv, FeatureRow};
use crate::classifiers::{fit_many, load_model, save_ensemble_manifest, save_model, ClassifierKind, TrainedModel};
use crate::dataset::{scan_dataset, LabeledDataset};
use crate::descriptors::extract;
use crate::error::{Error, Result};
use crate::eval::{evaluate, render_comparison, split_indices, Report};
use crate::io::{load_image, save_image};
use crate::par;
use crate::preprocess::preprocess;

pub const ENSEMBLE_FILE: &str = "ensemble.json";

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn dataset_root(cfg: &RunConfig) -> Result<&Path> {
    cfg.dataset
        .as_deref()
        .ok_or_else(|| Error::Config("no dataset given (set dataset.root or pass --dataset)".into()))
}

/// File name of a trained model inside a models directory.
pub fn model_file_name(kind: ClassifierKind) -> String {
    match kind {
        ClassifierKind::SoftVote => ENSEMBLE_FILE.to_string(),
        k => format!("{}.json", k.id()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessSummary {
    pub out_root: PathBuf,
    pub images: usize,
    pub classes: usize,
}

pub fn cmd_preprocess(cfg: &RunConfig) -> Result<PreprocessSummary> {
    cfg.validate()?;
    let src = dataset_root(cfg)?;
    let dst = cfg.out_dir.join("preprocessed");
    par::with_threads(cfg.threads, || preprocess_tree(src, &dst, cfg))
}

/// Preprocesses every image under `src` into `dst`, mirroring class directories.
pub fn preprocess_tree(src: &Path, dst: &Path, cfg: &RunConfig) -> Result<PreprocessSummary> {
    let manifest = scan_dataset(src)?;
    let ext = cfg.image_format.extension();
    let mut seen: HashMap<PathBuf, &Path> = HashMap::new();
    let mut jobs = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let class = &manifest.classes[entry.label].name;
        let stem = entry
            .path
            .file_stem()
            .ok_or_else(|| Error::Dataset(format!("{}: no file name", entry.path.display())))?;
        let out = dst.join(class).join(stem).with_extension(ext);
        if let Some(first) = seen.insert(out.clone(), &entry.path) {
            return Err(Error::Dataset(format!(
                "{} and {} would both be written to {}",
                first.display(),
                entry.path.display(),
                out.display()
            )));
        }
        jobs.push((entry.path.clone(), out));
    }
    for class in &manifest.classes {
        create_dir(&dst.join(&class.name))?;
    }
    par::map(&jobs, |(input, output)| {
        let img = load_image(input)?;
        let out = preprocess(&img, &cfg.preprocess)?;
        save_image(&out, output)
    })
    .into_iter()
    .collect::<Result<Vec<()>>>()?;
    info!("preprocessed {} images into {}", jobs.len(), dst.display());
    Ok(PreprocessSummary {
        out_root: dst.to_path_buf(),
        images: jobs.len(),
        classes: manifest.classes.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractSummary {
    pub rows: usize,
    pub skipped: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Extracts features from the dataset root as-is (no preprocessing).
pub fn cmd_extract(cfg: &RunConfig) -> Result<ExtractSummary> {
    cfg.validate()?;
    let root = dataset_root(cfg)?;
    par::with_threads(cfg.threads, || extract_tree(root, &cfg.out_dir, &cfg.descriptor_runs()))
}

/// Writes `<out_dir>/<tag>/features.csv` for every descriptor run. Each image
/// is decoded once; images that cannot be decoded or encoded are skipped with
/// a warning.
pub fn extract_tree(root: &Path, out_dir: &Path, runs: &[DescriptorRun]) -> Result<ExtractSummary> {
    let manifest = scan_dataset(root)?;
    let per_image: Vec<Result<Vec<Vec<f64>>>> = par::map(&manifest.entries, |entry| {
        let img = load_image(&entry.path)?;
        runs.iter()
            .map(|run| extract(&img, &run.descriptor).map(|f| f.into_vec()))
            .collect()
    });

    let mut tables: Vec<Vec<FeatureRow>> = vec![Vec::new(); runs.len()];
    let mut skipped = Vec::new();
    for (entry, result) in manifest.entries.iter().zip(per_image) {
        let rel = manifest.relative_path(entry);
        match result {
            Ok(features) => {
                for (table, values) in tables.iter_mut().zip(features) {
                    table.push(FeatureRow {
                        path: rel.clone(),
                        label: entry.label,
                        values,
                    });
                }
            }
            Err(e) => {
                warn!("skipping {rel}: {e}");
                skipped.push(rel);
            }
        }
    }
    let rows = tables.first().map_or(0, Vec::len);
    if rows == 0 {
        return Err(Error::Empty(format!("no usable images under {}", root.display())));
    }
    let mut files = Vec::with_capacity(runs.len());
    for (run, mut table) in runs.iter().zip(tables) {
        let dir = out_dir.join(&run.tag);
        create_dir(&dir)?;
        let path = dir.join("features.csv");
        write_features_csv(&path, &mut table)?;
        info!("wrote {} rows to {}", table.len(), path.display());
        files.push(path);
    }
    Ok(ExtractSummary { rows, skipped, files })
}

/// A feature table split into train and test halves.
#[derive(Clone, Debug)]
pub struct SplitData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub train_paths: Vec<String>,
    pub test_paths: Vec<String>,
}

pub fn split_features(rows: &[FeatureRow], cfg: &RunConfig) -> Result<SplitData> {
    let data = rows_to_dataset(rows)?;
    let (train_idx, test_idx) = split_indices(&data, &cfg.split)?;
    let paths = |idx: &[usize]| idx.iter().map(|&i| rows[i].path.clone()).collect();
    Ok(SplitData {
        train: data.subset(&train_idx),
        test: data.subset(&test_idx),
        train_paths: paths(&train_idx),
        test_paths: paths(&test_idx),
    })
}

fn write_split(split: &SplitData, cfg: &RunConfig, path: &Path) -> Result<()> {
    let doc = json!({
        "seed": cfg.split.seed,
        "train_fraction": cfg.split.train_fraction,
        "stratified": cfg.split.stratified,
        "train": split.train_paths,
        "test": split.test_paths,
    });
    write_file(path, serde_json::to_string_pretty(&doc)? + "\n")
}

fn train_log(train: &LabeledDataset, cfg: &RunConfig) -> String {
    let t = &cfg.train;
    let mut s = String::new();
    let _ = writeln!(s, "seed = {}", t.seed);
    let _ = writeln!(s, "samples = {}", train.len());
    let _ = writeln!(s, "dim = {}", train.dim());
    for (name, count) in train.class_names().iter().zip(train.class_counts()) {
        let _ = writeln!(s, "class {name} = {count}");
    }
    let _ = writeln!(s, "knn.k = {}", t.knn_k);
    let _ = writeln!(s, "nb.variance_floor = {}", t.nb_variance_floor);
    let _ = writeln!(s, "tree.max_depth = {}", t.tree_max_depth);
    let _ = writeln!(s, "tree.min_leaf = {}", t.tree_min_leaf);
    let _ = writeln!(s, "forest.trees = {}", t.forest_trees);
    let _ = writeln!(s, "forest.feature_fraction = {}", t.forest_feature_fraction);
    let _ = writeln!(s, "svm.epochs = {}", t.svm_epochs);
    let _ = writeln!(s, "svm.learning_rate = {}", t.svm_learning_rate);
    let _ = writeln!(s, "svm.regularization = {}", t.svm_regularization);
    s
}

/// Fits the configured classifiers and writes one file per model, an
/// ensemble manifest over the base models and a `train.log`.
pub fn train_models(train: &LabeledDataset, models_dir: &Path, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    if cfg.classifiers.is_empty() {
        return Err(Error::Config("no classifiers selected".into()));
    }
    train.require_all_classes()?;
    create_dir(models_dir)?;
    let models = fit_many(&cfg.classifiers, train, &cfg.train)?;
    let mut written = Vec::new();
    let mut names = Vec::new();
    for (kind, model) in cfg.classifiers.iter().zip(&models) {
        let name = model_file_name(*kind);
        let path = models_dir.join(&name);
        save_model(model, &path)?;
        written.push(path);
        names.push(name);
    }
    if cfg.ensemble {
        let path = models_dir.join(ENSEMBLE_FILE);
        save_ensemble_manifest(&names, &path)?;
        written.push(path);
    }
    write_file(&models_dir.join("train.log"), train_log(train, cfg))?;
    Ok(written)
}

pub fn load_models(models_dir: &Path, cfg: &RunConfig) -> Result<Vec<TrainedModel>> {
    cfg.model_kinds()
        .into_iter()
        .map(|kind| load_model(models_dir.join(model_file_name(kind))))
        .collect()
}

/// Evaluates each model on `test`, writing `<id>.json` and `<id>.txt` reports.
pub fn evaluate_models(
    models: &[TrainedModel],
    test: &LabeledDataset,
    descriptor_label: &str,
    reports_dir: &Path,
) -> Result<Vec<Report>> {
    create_dir(reports_dir)?;
    let mut reports = Vec::with_capacity(models.len());
    for model in models {
        let report = evaluate(model, test, descriptor_label)?;
        let id = model.kind().id();
        write_file(&reports_dir.join(format!("{id}.json")), report.to_json()?)?;
        write_file(&reports_dir.join(format!("{id}.txt")), report.render())?;
        reports.push(report);
    }
    Ok(reports)
}

fn write_comparison(reports: &[Report], out_dir: &Path) -> Result<()> {
    create_dir(out_dir)?;
    write_file(&out_dir.join("comparison.txt"), render_comparison(reports))?;
    write_file(
        &out_dir.join("comparison.json"),
        serde_json::to_string_pretty(reports)? + "\n",
    )
}

/// Explicit file locations for `train` and `evaluate` on a single feature table.
#[derive(Clone, Debug, Default)]
pub struct TableOverride {
    pub features: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub label: Option<String>,
}

struct Table {
    label: String,
    features: PathBuf,
    models: PathBuf,
    reports: PathBuf,
}

fn tables(cfg: &RunConfig, over: &TableOverride) -> Vec<Table> {
    match &over.features {
        Some(features) => {
            let base = features.parent().map(Path::to_path_buf).unwrap_or_default();
            let models = over.models.clone().unwrap_or_else(|| base.join("models"));
            vec![Table {
                label: over.label.clone().unwrap_or_else(|| "features".into()),
                features: features.clone(),
                reports: base.join("reports"),
                models,
            }]
        }
        None => cfg
            .descriptor_runs()
            .into_iter()
            .map(|run| {
                let dir = cfg.out_dir.join(&run.tag);
                Table {
                    label: run.label,
                    features: dir.join("features.csv"),
                    models: over.models.clone().unwrap_or_else(|| dir.join("models")),
                    reports: dir.join("reports"),
                }
            })
            .collect(),
    }
}

/// Trains on the training half of each feature table. The split is
/// recomputed from the configured seed, so `evaluate` sees the same halves.
pub fn cmd_train(cfg: &RunConfig, over: &TableOverride) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    par::with_threads(cfg.threads, || {
        let mut written = Vec::new();
        for t in tables(cfg, over) {
            let split = split_features(&read_features_csv(&t.features)?, cfg)?;
            written.extend(train_models(&split.train, &t.models, cfg)?);
        }
        Ok(written)
    })
}

pub fn cmd_evaluate(cfg: &RunConfig, over: &TableOverride) -> Result<Vec<Report>> {
    cfg.validate()?;
    par::with_threads(cfg.threads, || {
        let mut reports = Vec::new();
        for t in tables(cfg, over) {
            let split = split_features(&read_features_csv(&t.features)?, cfg)?;
            let models = load_models(&t.models, cfg)?;
            reports.extend(evaluate_models(&models, &split.test, &t.label, &t.reports)?);
        }
        let out = match &over.features {
            Some(_) => tables(cfg, over)[0].reports.clone(),
            None => cfg.out_dir.clone(),
        };
        write_comparison(&reports, &out)?;
        Ok(reports)
    })
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub reports: Vec<Report>,
    pub skipped: Vec<String>,
    pub stage_seconds: Vec<(&'static str, f64)>,
}

/// Runs preprocess, extract, split, train and evaluate in order. A failure
/// is reported with the stage it happened in.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let src = dataset_root(cfg)?;
    par::with_threads(cfg.threads, || {
        let runs = cfg.descriptor_runs();
        let mut timings: Vec<(&'static str, f64)> = Vec::new();
        let timed = |stage: &'static str, timings: &mut Vec<_>, start: Instant| {
            timings.push((stage, start.elapsed().as_secs_f64()));
        };

        let start = Instant::now();
        let pre = preprocess_tree(src, &cfg.out_dir.join("preprocessed"), cfg).map_err(|e| e.in_stage("preprocess"))?;
        timed("preprocess", &mut timings, start);

        let start = Instant::now();
        let extracted = extract_tree(&pre.out_root, &cfg.out_dir, &runs).map_err(|e| e.in_stage("extract"))?;
        timed("extract", &mut timings, start);

        let start = Instant::now();
        let splits = runs
            .iter()
            .zip(&extracted.files)
            .map(|(run, csv)| {
                let split = split_features(&read_features_csv(csv)?, cfg)?;
                write_split(&split, cfg, &cfg.out_dir.join(&run.tag).join("split.json"))?;
                Ok(split)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("split"))?;
        timed("split", &mut timings, start);

        let start = Instant::now();
        for (run, split) in runs.iter().zip(&splits) {
            train_models(&split.train, &cfg.out_dir.join(&run.tag).join("models"), cfg)
                .map_err(|e| e.in_stage("train"))?;
        }
        timed("train", &mut timings, start);

        let start = Instant::now();
        let mut reports = Vec::new();
        for (run, split) in runs.iter().zip(&splits) {
            let dir = cfg.out_dir.join(&run.tag);
            let rs = load_models(&dir.join("models"), cfg)
                .and_then(|models| evaluate_models(&models, &split.test, &run.label, &dir.join("reports")))
                .map_err(|e| e.in_stage("evaluate"))?;
            reports.extend(rs);
        }
        write_comparison(&reports, &cfg.out_dir).map_err(|e| e.in_stage("evaluate"))?;
        timed("evaluate", &mut timings, start);

        let manifest = json!({
            "config": cfg
                .to_pairs()
                .into_iter()
                .map(|(k, v)| (k, serde_json::Value::String(v)))
                .collect::<serde_json::Map<_, _>>(),
            "seed": cfg.train.seed,
            "threads": cfg.threads,
            "images": pre.images,
            "skipped": extracted.skipped,
            "stage_seconds": timings.iter().map(|(s, t)| json!({"stage": s, "seconds": t})).collect::<Vec<_>>(),
        });
        write_file(
            &cfg.out_dir.join("run_manifest.json"),
            serde_json::to_string_pretty(&manifest)? + "\n",
        )?;
        Ok(RunSummary {
            reports,
            skipped: extracted.skipped,
            stage_seconds: timings,
        })
    })
}
