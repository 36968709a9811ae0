//! Train/test splitting, confusion matrices and one-vs-rest metrics.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::TrainedModel;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.8,
            seed: 42,
            stratified: true,
        }
    }
}

/// `⌊fraction · n⌋`, tolerant of representation error such as `0.7 · 10`.
fn train_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}

/// Splits into `(train, test)`.
///
/// Stratified: each class is shuffled independently and its first
/// `⌊fraction · count⌋` samples go to training (at least one sample stays on
/// each side). Otherwise the whole set is shuffled once. Both halves keep the
/// original row order.
pub fn split(data: &LabeledDataset, cfg: &SplitConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(data, cfg)?;
    Ok((data.subset(&train), data.subset(&test)))
}

/// Row indices of the train and test halves, each in ascending order.
pub fn split_indices(data: &LabeledDataset, cfg: &SplitConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0, 1), got {}",
            cfg.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    if cfg.stratified {
        for class in 0..data.num_classes() {
            let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.labels()[i] == class).collect();
            if idx.len() < 2 {
                return Err(Error::Dataset(format!(
                    "class {} has {} sample(s); a stratified split needs at least 2",
                    data.class_names()[class],
                    idx.len()
                )));
            }
            idx.shuffle(&mut rng);
            let k = train_count(cfg.train_fraction, idx.len()).clamp(1, idx.len() - 1);
            train.extend_from_slice(&idx[..k]);
            test.extend_from_slice(&idx[k..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.shuffle(&mut rng);
        let k = train_count(cfg.train_fraction, idx.len());
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if k == 0 || counts.iter().any(|r| r.len() != k) {
            return Err(Error::Dataset("confusion matrix must be square and nonempty".into()));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes()).map(|i| self.counts[i][i]).sum()
    }

    /// `(tp, fp, fn, tn)` with `positive` as the positive class.
    pub fn one_vs_rest(&self, positive: usize) -> (u64, u64, u64, u64) {
        let tp = self.counts[positive][positive];
        let fp: u64 = (0..self.num_classes())
            .filter(|&t| t != positive)
            .map(|t| self.counts[t][positive])
            .sum();
        let fn_: u64 = self.counts[positive].iter().sum::<u64>() - tp;
        let tn = self.total() - tp - fp - fn_;
        (tp, fp, fn_, tn)
    }
}

pub fn confusion(truth: &[usize], predicted: &[usize], num_classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::Dataset(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut counts = vec![vec![0u64; num_classes]; num_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= num_classes || p >= num_classes {
            return Err(Error::Dataset(format!(
                "label pair ({t}, {p}) out of range for {num_classes} classes"
            )));
        }
        counts[t][p] += 1;
    }
    ConfusionMatrix::from_counts(counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest metrics; zero denominators give 0.
pub fn class_metrics(cm: &ConfusionMatrix, positive: usize) -> ClassMetrics {
    let (tp, fp, fn_, tn) = cm.one_vs_rest(positive);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    // Equal to 2PR/(P+R), computed as a single division.
    let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
    ClassMetrics {
        precision,
        recall,
        f1,
        accuracy: ratio(tp + tn, cm.total()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub descriptor: String,
    pub classifier: String,
    pub overall_accuracy: f64,
    pub classes: Vec<ClassReport>,
    pub confusion: Vec<Vec<u64>>,
}

impl Report {
    pub fn from_predictions(
        descriptor: &str,
        classifier: &str,
        class_names: &[String],
        truth: &[usize],
        predicted: &[usize],
    ) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::Empty("test set has no samples".into()));
        }
        let cm = confusion(truth, predicted, class_names.len())?;
        let classes = class_names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let m = class_metrics(&cm, i);
                ClassReport {
                    name: name.clone(),
                    precision: m.precision,
                    recall: m.recall,
                    f1: m.f1,
                    accuracy: m.accuracy,
                }
            })
            .collect();
        Ok(Report {
            descriptor: descriptor.to_string(),
            classifier: classifier.to_string(),
            overall_accuracy: ratio(cm.trace(), cm.total()),
            classes,
            confusion: cm.counts,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Aligned text table: one row per class plus the confusion matrix.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Feature Descriptor: {}", self.descriptor);
        let _ = writeln!(out, "Classifier:         {}", self.classifier);
        let _ = writeln!(out, "Test Accuracy:      {:.4}", self.overall_accuracy);
        let _ = writeln!(out);
        let name_w = self.classes.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>9}  {:>9}  {:>9}  {:>9}",
            "Class", "Precision", "Recall", "F1 Score", "Accuracy"
        );
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{:<name_w$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}",
                c.name, c.precision, c.recall, c.f1, c.accuracy
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "Confusion (rows = true, columns = predicted):");
        let cell_w = self
            .confusion
            .iter()
            .flatten()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1)
            .max(4);
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>cell_w$}")).collect();
            let _ = writeln!(out, "{:<name_w$}  {}", c.name, cells.join(" "));
        }
        out
    }
}

/// Predicts every row of `test` and scores the result.
pub fn evaluate(model: &TrainedModel, test: &LabeledDataset, descriptor: &str) -> Result<Report> {
    if test.is_empty() {
        return Err(Error::Empty("test set has no samples".into()));
    }
    if model.class_names != test.class_names() {
        return Err(Error::ClassMismatch(format!(
            "model classes {:?} vs test classes {:?}",
            model.class_names,
            test.class_names()
        )));
    }
    let predicted = model.predict_all(test)?;
    Report::from_predictions(
        descriptor,
        model.kind().display_name(),
        test.class_names(),
        test.labels(),
        &predicted,
    )
}

/// Overall accuracy once per (descriptor, classifier), followed by one table
/// per class with that class's one-vs-rest accuracy, precision, recall and F1.
pub fn render_comparison(reports: &[Report]) -> String {
    let mut out = String::new();
    let Some(first) = reports.first() else {
        return out;
    };
    let desc_w = reports.iter().map(|r| r.descriptor.len()).max().unwrap_or(0).max(18);
    let clf_w = reports.iter().map(|r| r.classifier.len()).max().unwrap_or(0).max(10);

    let _ = writeln!(out, "Overall");
    let header = format!(
        "{:<desc_w$} | {:<clf_w$} | {:>13}",
        "Feature Descriptor", "Classifier", "Test Accuracy"
    );
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{}", "-".repeat(header.len()));
    for r in reports {
        let _ = writeln!(
            out,
            "{:<desc_w$} | {:<clf_w$} | {:>13.4}",
            r.descriptor, r.classifier, r.overall_accuracy
        );
    }
    let _ = writeln!(out);

    for (ci, class) in first.classes.iter().enumerate() {
        let _ = writeln!(out, "Class: {}", class.name);
        let header = format!(
            "{:<desc_w$} | {:<clf_w$} | {:>8} | {:>9} | {:>6} | {:>8}",
            "Feature Descriptor", "Classifier", "Accuracy", "Precision", "Recall", "F1 Score"
        );
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{}", "-".repeat(header.len()));
        for r in reports {
            let Some(c) = r.classes.get(ci) else { continue };
            let _ = writeln!(
                out,
                "{:<desc_w$} | {:<clf_w$} | {:>8.4} | {:>9.4} | {:>6.4} | {:>8.4}",
                r.descriptor, r.classifier, c.accuracy, c.precision, c.recall, c.f1
            );
        }
        let _ = writeln!(out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(per_class: &[usize]) -> LabeledDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, &n) in per_class.iter().enumerate() {
            for i in 0..n {
                rows.push(vec![c as f64, i as f64]);
                labels.push(c);
            }
        }
        let names = (0..per_class.len()).map(|c| format!("c{c}")).collect();
        LabeledDataset::new(rows, labels, names).unwrap()
    }

    #[test]
    fn eighty_twenty() {
        let (train, test) = split(&ds(&[10, 10, 10, 10]), &SplitConfig::default()).unwrap();
        assert_eq!(train.class_counts(), vec![8, 8, 8, 8]);
        assert_eq!(test.class_counts(), vec![2, 2, 2, 2]);
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let data = ds(&[7, 9, 13]);
        let cfg = SplitConfig {
            seed: 9,
            ..Default::default()
        };
        let a = split(&data, &cfg).unwrap();
        let b = split(&data, &cfg).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<Vec<f64>> = a.0.rows().chain(a.1.rows()).map(<[f64]>::to_vec).collect();
        all.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut orig: Vec<Vec<f64>> = data.rows().map(<[f64]>::to_vec).collect();
        orig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(all, orig);
    }

    #[test]
    fn tiny_class_rejected() {
        assert!(split(&ds(&[5, 1]), &SplitConfig::default()).is_err());
        let cfg = SplitConfig {
            stratified: false,
            ..Default::default()
        };
        let (train, test) = split(&ds(&[5, 1]), &cfg).unwrap();
        assert_eq!((train.len(), test.len()), (4, 2));
    }

    #[test]
    fn confusion_basics() {
        let cm = confusion(&[0, 1], &[0, 1], 2).unwrap();
        assert_eq!(cm.counts(), &[vec![1, 0], vec![0, 1]]);
        let cm = confusion(&[0, 0], &[1, 1], 2).unwrap();
        assert_eq!(cm.counts()[0][1], 2);
        assert!(confusion(&[0], &[0, 1], 2).is_err());
        assert!(confusion(&[0], &[2], 2).is_err());
    }

    #[test]
    fn metrics_by_hand() {
        // TP=1 FP=1 FN=1 TN=1 for class 0.
        let cm = ConfusionMatrix::from_counts(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let m = class_metrics(&cm, 0);
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (0.5, 0.5, 0.5, 0.5));
        let cm = ConfusionMatrix::from_counts(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let m = class_metrics(&cm, 0);
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
        let cm = ConfusionMatrix::from_counts(vec![vec![0, 3], vec![0, 5]]).unwrap();
        let m = class_metrics(&cm, 0);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn report_json_round_trip_and_render() {
        let names = vec!["cyst".to_string(), "normal".to_string()];
        let r = Report::from_predictions("ALBP", "K-NN", &names, &[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        assert_eq!(r.overall_accuracy, 0.75);
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.render(), r.render());
        assert!(r.render().contains("cyst"));
    }

    #[test]
    fn empty_report_rejected() {
        let names = vec!["a".to_string()];
        assert!(Report::from_predictions("x", "y", &names, &[], &[]).is_err());
    }

    #[test]
    fn comparison_has_one_row_per_report_per_class() {
        let names = vec!["a".to_string(), "b".to_string()];
        let reports: Vec<Report> = ["LBP", "ALBP"]
            .iter()
            .flat_map(|d| {
                let names = names.clone();
                (0..6).map(move |c| Report::from_predictions(d, &format!("clf{c}"), &names, &[0, 1], &[0, 0]).unwrap())
            })
            .collect();
        let table = render_comparison(&reports);
        let rows = table
            .lines()
            .filter(|l| l.starts_with("LBP") || l.starts_with("ALBP"))
            .count();
        // 12 overall rows, then 12 per class.
        assert_eq!(rows, 12 + 24);
        assert_eq!(table.matches("Class: ").count(), 2);
    }
}
