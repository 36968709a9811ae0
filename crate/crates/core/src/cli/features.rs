//! Feature CSV: header `path,label,f0,...,f255`, then one row per image.
//!
//! `path` is relative to the dataset root with `/` separators and its first
//! component is the class directory, which is how class names are recovered
//! when reading. Values use 9 significant digits.

use std::fs;
use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub path: String,
    pub label: usize,
    pub values: Vec<f64>,
}

/// Shortest-form rendering with 9 significant digits, like C's `%.9g`.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    fn trim(s: &str) -> &str {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            s
        }
    }
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

pub fn render_features_csv(rows: &[FeatureRow]) -> Result<Vec<u8>> {
    let dim = rows.first().map_or(256, |r| r.values.len());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["path".to_string(), "label".to_string()];
    header.extend((0..dim).map(|i| format!("f{i}")));
    let csv_err = |e: csv::Error| Error::Dataset(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        if row.values.len() != dim {
            return Err(Error::Dataset(format!(
                "{}: {} features, expected {dim}",
                row.path,
                row.values.len()
            )));
        }
        let mut record = Vec::with_capacity(dim + 2);
        record.push(row.path.clone());
        record.push(row.label.to_string());
        record.extend(row.values.iter().map(|&v| format_sig9(v)));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Dataset(format!("csv: {e}")))
}

/// Writes rows sorted by path.
pub fn write_features_csv(path: impl AsRef<Path>, rows: &mut [FeatureRow]) -> Result<()> {
    let path = path.as_ref();
    rows.sort_by(|a, b| a.path.cmp(&b.path));
    fs::write(path, render_features_csv(rows)?).map_err(|e| Error::io(path, e))
}

pub fn read_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_features_csv(&bytes, path)
}

pub fn parse_features_csv(bytes: &[u8], origin: &Path) -> Result<Vec<FeatureRow>> {
    let err = |line: u64, reason: String| Error::Csv {
        path: origin.to_path_buf(),
        line,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.len() < 3 || &header[0] != "path" || &header[1] != "label" {
        return Err(err(1, "expected header `path,label,f0,...`".into()));
    }
    let dim = header.len() - 2;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let label: usize = record[1]
            .trim()
            .parse()
            .map_err(|_| err(line, format!("label {:?} is not a class index", &record[1])))?;
        let values = (0..dim)
            .map(|i| {
                let cell = record[i + 2].trim();
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(line, format!("column f{i}: {cell:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureRow {
            path: record[0].to_string(),
            label,
            values,
        });
    }
    Ok(rows)
}

/// Recovers class names from the first path component of each row.
pub fn class_names_from_rows(rows: &[FeatureRow]) -> Result<Vec<String>> {
    let num_classes = rows.iter().map(|r| r.label + 1).max().unwrap_or(0);
    let mut names: Vec<Option<String>> = vec![None; num_classes];
    for r in rows {
        let class = r.path.split('/').next().unwrap_or("").to_string();
        match &names[r.label] {
            None => names[r.label] = Some(class),
            Some(existing) if *existing != class => {
                return Err(Error::Dataset(format!(
                    "label {} is used for both {existing:?} and {class:?}",
                    r.label
                )))
            }
            _ => {}
        }
    }
    names
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.ok_or_else(|| Error::Dataset(format!("no rows carry label {i}"))))
        .collect()
}

pub fn rows_to_dataset(rows: &[FeatureRow]) -> Result<LabeledDataset> {
    if rows.is_empty() {
        return Err(Error::Empty("feature file has no rows".into()));
    }
    let names = class_names_from_rows(rows)?;
    LabeledDataset::new(
        rows.iter().map(|r| r.values.clone()).collect(),
        rows.iter().map(|r| r.label).collect(),
        names,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(0.0123456789123), "0.0123456789");
        assert_eq!(format_sig9(2.0 / 50176.0), "3.98596939e-05");
        assert_eq!(format_sig9(0.99999999999), "1");
        assert_eq!(format_sig9(123456789.0), "123456789");
        assert_eq!(format_sig9(1234567891.0), "1.23456789e+09");
        assert_eq!(format_sig9(-0.25), "-0.25");
    }

    #[test]
    fn sig9_is_within_relative_precision() {
        for i in 1..2000 {
            let v = i as f64 / 50176.0;
            let back: f64 = format_sig9(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 5e-9, "{v} -> {back}");
        }
    }

    fn rows() -> Vec<FeatureRow> {
        vec![
            FeatureRow {
                path: "b/x.png".into(),
                label: 1,
                values: vec![0.25, 0.75],
            },
            FeatureRow {
                path: "a/y.png".into(),
                label: 0,
                values: vec![1.0, 0.0],
            },
        ]
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut r = rows();
        write_features_csv(&path, &mut r).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "path,label,f0,f1\na/y.png,0,1,0\nb/x.png,1,0.25,0.75\n");
        let back = read_features_csv(&path).unwrap();
        assert_eq!(back, r);
        let ds = rows_to_dataset(&back).unwrap();
        assert_eq!(ds.class_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn non_numeric_cell_reports_line() {
        let text = b"path,label,f0\na/1.png,0,0.5\na/2.png,0,abc\n";
        let err = parse_features_csv(text, Path::new("f.csv")).unwrap_err();
        match err {
            Error::Csv { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        let text = b"path,label,f0,f1\na/1.png,0,0.5\n";
        assert!(matches!(
            parse_features_csv(text, Path::new("f.csv")),
            Err(Error::Csv { line: 2, .. })
        ));
    }

    #[test]
    fn inconsistent_class_dirs() {
        let mut r = rows();
        r[1].label = 1;
        assert!(class_names_from_rows(&r).is_err());
    }
}
