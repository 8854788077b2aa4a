//! Artifact collection, writing and the reproducibility manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::svg::Plot;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

/// Files produced by one command, held in memory until written.
#[derive(Default)]
pub struct Artifacts {
    files: BTreeMap<String, (Format, Vec<u8>)>,
    pub seeds: Vec<u64>,
    pub summary: Vec<String>,
}

impl Artifacts {
    pub fn csv(&mut self, name: &str, table: Table) {
        self.files.insert(format!("{name}.csv"), (Format::Csv, table.render().into_bytes()));
    }

    /// Wraps `body` as `{ "schema_version": .., "kind": name, "data": body }`.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "kind": name,
            "data": body,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
        bytes.push(b'\n');
        self.files.insert(format!("{name}.json"), (Format::Json, bytes));
        Ok(())
    }

    pub fn svg(&mut self, name: &str, plot: &Plot) {
        self.files.insert(format!("{name}.svg"), (Format::Svg, plot.render().into_bytes()));
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

/// A CSV table with a header row and fixed-precision floats.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = match c {
                    Cell::F(v) => write!(s, "{v:.12e}"),
                    Cell::I(v) => write!(s, "{v}"),
                    Cell::S(v) => write!(s, "{v}"),
                };
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub bytes: usize,
    pub fnv1a: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub files: Vec<ManifestFile>,
}

pub fn fnv1a(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Writes the requested formats and the manifest into `dir`.
pub fn write_all(dir: &Path, command: &str, config: &RunConfig, art: &Artifacts) -> Result<Manifest, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for (name, (format, bytes)) in &art.files {
        if !config.output.wants(*format) {
            continue;
        }
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
        files.push(ManifestFile { name: name.clone(), bytes: bytes.len(), fnv1a: fnv1a(bytes) });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "axionkit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: axionkit_core::VERSION.into(),
        command: command.into(),
        config: config.clone(),
        seeds: art.seeds.clone(),
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    fs::write(dir.join(MANIFEST), bytes)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        CliError::Config(format!("{} at `{}`: {}", path.display(), e.path(), e.inner()))
    })
}
