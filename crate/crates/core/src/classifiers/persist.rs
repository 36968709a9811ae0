//! Model files.
//!
//! A model file is a JSON object `{"format", "format_version", "model"}`
//! where `model` carries a `kind` discriminator. An ensemble manifest
//! (`format = "albp-ensemble"`) instead lists member model files relative to
//! its own directory; loading it yields a soft-voting model.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::TrainedModel;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "albp-model";
pub const ENSEMBLE_FORMAT: &str = "albp-ensemble";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct ModelFileRef<'a> {
    format: &'static str,
    format_version: u32,
    model: &'a TrainedModel,
}

#[derive(Serialize, Deserialize)]
struct EnsembleManifest {
    format: String,
    format_version: u32,
    members: Vec<String>,
}

/// Serializes a model to bytes in the model-file layout.
pub fn write_model(model: &TrainedModel) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(&ModelFileRef {
        format: MODEL_FORMAT,
        format_version: MODEL_FORMAT_VERSION,
        model,
    })?;
    out.push(b'\n');
    Ok(out)
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_model(model)?).map_err(|e| Error::io(path, e))
}

/// Writes an ensemble manifest pointing at already-saved member files.
pub fn save_ensemble_manifest(members: &[impl AsRef<str>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let manifest = EnsembleManifest {
        format: ENSEMBLE_FORMAT.into(),
        format_version: MODEL_FORMAT_VERSION,
        members: members.iter().map(|m| m.as_ref().to_string()).collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::CorruptModel {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Parses model-file bytes. Ensemble manifests are rejected here because
/// their members must be resolved from disk; use [`load_model`] for those.
pub fn read_model(bytes: &[u8], origin: &Path) -> Result<TrainedModel> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| corrupt(origin, e.to_string()))?;
    let (format, version) = header(&value, origin)?;
    if format != MODEL_FORMAT {
        return Err(corrupt(
            origin,
            format!("expected format {MODEL_FORMAT:?}, found {format:?}"),
        ));
    }
    check_version(version, origin)?;
    let model = value
        .get("model")
        .cloned()
        .ok_or_else(|| corrupt(origin, "missing \"model\""))?;
    serde_json::from_value(model).map_err(|e| corrupt(origin, e.to_string()))
}

fn header(value: &Value, origin: &Path) -> Result<(String, u64)> {
    let format = value
        .get("format")
        .and_then(Value::as_str)
        .ok_or_else(|| corrupt(origin, "missing \"format\""))?;
    let version = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt(origin, "missing \"format_version\""))?;
    Ok((format.to_string(), version))
}

fn check_version(version: u64, origin: &Path) -> Result<()> {
    if version != MODEL_FORMAT_VERSION as u64 {
        return Err(Error::ModelVersion {
            path: origin.to_path_buf(),
            found: version.min(u32::MAX as u64) as u32,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    Ok(())
}

/// Loads a model file or an ensemble manifest.
pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| corrupt(path, e.to_string()))?;
    let (format, version) = header(&value, path)?;
    if format != ENSEMBLE_FORMAT {
        return read_model(&bytes, path);
    }
    check_version(version, path)?;
    let manifest: EnsembleManifest = serde_json::from_value(value).map_err(|e| corrupt(path, e.to_string()))?;
    let dir: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let members = manifest
        .members
        .iter()
        .map(|m| load_model(dir.join(m)))
        .collect::<Result<Vec<_>>>()?;
    TrainedModel::from_members(members)
}
