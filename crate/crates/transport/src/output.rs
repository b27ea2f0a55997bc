//! CSV and JSON emission. Files are rendered in memory, hashed, then written,
//! so the manifest always describes exactly the bytes on disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nlse_core::SpectrumTable;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::TransportError;

/// Shortest text that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

fn csv_bytes<I, R>(rows: I) -> Result<Vec<u8>, TransportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for row in rows {
        w.write_record(row).map_err(|e| TransportError::Invalid(format!("csv encoding failed: {e}")))?;
    }
    w.into_inner().map_err(|e| TransportError::Invalid(format!("csv encoding failed: {e}")))
}

/// Header of axis name then column names, one row per axis value.
pub fn table_csv(t: &SpectrumTable) -> Result<Vec<u8>, TransportError> {
    let header = std::iter::once(t.axis_name.clone()).chain(t.columns.iter().map(|c| c.name.clone()));
    let header: Vec<String> = header.collect();
    let rows = (0..t.len()).map(|i| {
        std::iter::once(format_float(t.axis[i]))
            .chain(t.columns.iter().map(move |c| format_float(c.values[i])))
            .collect::<Vec<_>>()
    });
    csv_bytes(std::iter::once(header).chain(rows))
}

/// A headerless numeric matrix, row `i` holding `f(i, 0..cols)`.
pub fn matrix_csv(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Vec<u8>, TransportError> {
    csv_bytes((0..rows).map(|i| (0..cols).map(|j| format_float(f(i, j))).collect::<Vec<_>>()))
}

/// Rows of already formatted cells under a header.
pub fn text_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, TransportError> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    csv_bytes(std::iter::once(header).chain(rows))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, TransportError> {
    let mut v = serde_json::to_vec_pretty(value)
        .map_err(|e| TransportError::Invalid(format!("json encoding failed: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

/// One rendered output file, named relative to the run directory.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Artifact { name: name.into(), bytes }
    }

    pub fn table(name: &str, t: &SpectrumTable) -> Result<Self, TransportError> {
        Ok(Artifact::new(format!("{name}.csv"), table_csv(t)?))
    }

    /// JSON sidecar with the table layout, its metadata and the parameters.
    pub fn sidecar<P: Serialize>(name: &str, t: &SpectrumTable, params: &P) -> Result<Self, TransportError> {
        let meta: BTreeMap<&str, &str> = t.metadata.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let doc = serde_json::json!({
            "axis": t.axis_name,
            "columns": t.columns.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(),
            "rows": t.len(),
            "metadata": meta,
            "parameters": params,
        });
        Ok(Artifact::new(format!("{name}.json"), json_bytes(&doc)?))
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(&self.bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    /// Per sweep cell, in axis order; empty for single runs.
    pub cell_seconds: Vec<f64>,
}

/// Record of a completed run. Timings appear only here, never in data files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub mode: String,
    pub version: String,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
    pub timings: Timings,
    /// Run-level status notes such as convergence.
    pub status: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes every artifact, then the manifest listing them.
pub fn write_run(dir: &Path, artifacts: &[Artifact], manifest: &mut RunManifest) -> Result<PathBuf, TransportError> {
    let io = |path: &Path, source| TransportError::Io { path: path.to_path_buf(), source };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    manifest.outputs.clear();
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
        }
        fs::write(&path, &a.bytes).map_err(|e| io(&path, e))?;
        manifest.outputs.push(OutputRecord { path: a.name.clone(), sha256: a.sha256(), bytes: a.bytes.len() as u64 });
    }
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, json_bytes(manifest)?).map_err(|e| io(&path, e))?;
    Ok(path)
}
