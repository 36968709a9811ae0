//! Directory-per-class image trees and labeled feature matrices.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::has_image_extension;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassLabel {
    pub index: usize,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: usize,
}

/// Images found under a dataset root, each tagged with its class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageManifest {
    pub root: PathBuf,
    pub classes: Vec<ClassLabel>,
    pub entries: Vec<ManifestEntry>,
}

impl ImageManifest {
    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    /// Path of an entry relative to the dataset root, with `/` separators.
    pub fn relative_path(&self, entry: &ManifestEntry) -> String {
        let rel = entry.path.strip_prefix(&self.root).unwrap_or(&entry.path);
        rel.components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/")
    }
}

/// Scans `<root>/<class-name>/<image-file>`.
///
/// Class indices follow the lexicographic order of the subdirectory names;
/// entries are sorted by path so the result does not depend on the order in
/// which the filesystem enumerates directories.
pub fn scan_dataset(root: impl AsRef<Path>) -> Result<ImageManifest> {
    let root = root.as_ref();
    let mut class_dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let ty = entry.file_type().map_err(|e| Error::io(entry.path(), e))?;
        if ty.is_dir() || (ty.is_symlink() && entry.path().is_dir()) {
            let name = entry.file_name().to_string_lossy().into_owned();
            if !name.starts_with('.') {
                class_dirs.push((name, entry.path()));
            }
        }
    }
    class_dirs.sort();
    if class_dirs.is_empty() {
        return Err(Error::Dataset(format!("{}: no class directories", root.display())));
    }
    if class_dirs.len() < 2 {
        return Err(Error::Dataset(format!(
            "{}: need at least 2 class directories, found 1 ({})",
            root.display(),
            class_dirs[0].0
        )));
    }

    let mut classes = Vec::with_capacity(class_dirs.len());
    let mut entries = Vec::new();
    for (index, (name, dir)) in class_dirs.into_iter().enumerate() {
        let mut found = 0usize;
        for file in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = file.map_err(|e| Error::io(&dir, e))?.path();
            if path.is_file() && has_image_extension(&path) {
                entries.push(ManifestEntry { path, label: index });
                found += 1;
            }
        }
        if found == 0 {
            return Err(Error::Dataset(format!(
                "{}: class directory contains no images",
                dir.display()
            )));
        }
        classes.push(ClassLabel { index, name });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));

    Ok(ImageManifest {
        root: root.to_path_buf(),
        classes,
        entries,
    })
}

/// Row-major feature matrix with one class index per row.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Dataset(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if class_names.is_empty() {
            return Err(Error::Dataset("no classes".into()));
        }
        let unique: HashSet<&String> = class_names.iter().collect();
        if unique.len() != class_names.len() {
            return Err(Error::Dataset("duplicate class names".into()));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dataset(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!("row {i} holds non-finite value {v}")));
            }
            features.extend(row);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Dataset(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(LabeledDataset {
            dim,
            features,
            labels,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        LabeledDataset {
            dim: self.dim,
            features,
            labels,
            class_names: self.class_names.clone(),
        }
    }

    /// Errors unless every class has at least one sample.
    pub fn require_all_classes(&self) -> Result<()> {
        for (c, n) in self.class_counts().into_iter().enumerate() {
            if n == 0 {
                return Err(Error::Dataset(format!(
                    "class {c} ({}) has no samples",
                    self.class_names[c]
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(path: &Path) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, b"P5\n1 1\n255\n\x01").unwrap();
    }

    #[test]
    fn four_classes_in_lexicographic_order() {
        let dir = tempfile::tempdir().unwrap();
        for class in ["tumor", "cyst", "stone", "normal"] {
            touch(&dir.path().join(class).join("a.pgm"));
        }
        let m = scan_dataset(dir.path()).unwrap();
        assert_eq!(m.class_names(), vec!["cyst", "normal", "stone", "tumor"]);
        assert_eq!(m.classes.iter().map(|c| c.index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(m.entries.len(), 4);
    }

    #[test]
    fn same_file_name_in_two_classes() {
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("a").join("x.pgm"));
        touch(&dir.path().join("b").join("x.pgm"));
        let m = scan_dataset(dir.path()).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_ne!(m.entries[0].path, m.entries[1].path);
        assert_eq!(m.relative_path(&m.entries[1]), "b/x.pgm");
    }

    #[test]
    fn one_class_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        touch(&dir.path().join("only").join("x.pgm"));
        assert!(matches!(scan_dataset(dir.path()), Err(Error::Dataset(_))));
    }

    #[test]
    fn no_classes_and_empty_class() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(scan_dataset(dir.path()), Err(Error::Dataset(_))));
        touch(&dir.path().join("a").join("x.pgm"));
        fs::create_dir_all(dir.path().join("b")).unwrap();
        fs::write(dir.path().join("b").join("readme.txt"), "x").unwrap();
        let err = scan_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("no images"), "{err}");
    }

    #[test]
    fn missing_root() {
        let err = scan_dataset("/definitely/not/here").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/definitely/not/here"));
    }

    #[test]
    fn dataset_validation() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(LabeledDataset::new(vec![vec![0.0]], vec![0, 1], names.clone()).is_err());
        assert!(LabeledDataset::new(vec![vec![0.0]], vec![2], names.clone()).is_err());
        assert!(LabeledDataset::new(vec![vec![0.0], vec![0.0, 1.0]], vec![0, 1], names.clone()).is_err());
        let ds = LabeledDataset::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![1, 0], names).unwrap();
        assert_eq!(ds.row(1), &[3.0, 4.0]);
        assert_eq!(ds.subset(&[1]).labels(), &[0]);
        assert_eq!(ds.class_counts(), vec![1, 1]);
    }
}
