//! CSV tables, JSON reports and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

/// A CSV cell: integers print as-is, reals in `{:.12e}`.
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) if v.is_nan() => "nan".into(),
            Cell::Real(v) => format!("{v:.12e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A table whose header names every column with its unit, e.g. `energy[cm-1]`.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self { header: columns.iter().map(|(name, unit)| format!("{name}[{unit}]")).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, Failure> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Failure::Io(anyhow::Error::new(e).context("formatting CSV"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| Failure::Io(anyhow::anyhow!("formatting CSV: {e}")))
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::Io(anyhow::Error::new(e).context("formatting JSON")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything an experiment produces, held in memory until the run succeeds.
#[derive(Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Artifacts {
    pub fn table(&mut self, name: &str, table: &Table) -> Result<(), Failure> {
        self.files.push((name.to_string(), table.to_bytes()?));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        self.files.push((name.to_string(), json_bytes(value)?));
        Ok(())
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }
}

#[derive(Serialize)]
struct OutputEntry {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    tool: &'static str,
    tool_version: &'static str,
    experiment: String,
    config_schema_version: u32,
    config_sha256: String,
    seed: Option<u64>,
    tolerances: &'a BTreeMap<String, f64>,
    outputs: Vec<OutputEntry>,
}

pub struct RunInfo<'a> {
    pub experiment: String,
    pub config_bytes: &'a [u8],
    pub seed: Option<u64>,
}

/// Write every artifact and then `manifest.json` into `dir`.
pub fn write_all(dir: &Path, artifacts: &Artifacts, info: &RunInfo) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut outputs = Vec::new();
    for (name, bytes) in &artifacts.files {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        outputs.push(OutputEntry { path: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
    }
    let manifest = Manifest {
        manifest_version: 1,
        tool: "susyqm",
        tool_version: env!("CARGO_PKG_VERSION"),
        experiment: info.experiment.clone(),
        config_schema_version: crate::config::SCHEMA_VERSION,
        config_sha256: sha256_hex(info.config_bytes),
        seed: info.seed,
        tolerances: &artifacts.tolerances,
        outputs,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, json_bytes(&manifest)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
