//! CSV/JSON artifacts and the run manifest.
//!
//! Artifacts are rendered to bytes in memory and written in insertion order
//! once the experiment has finished.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Name of the manifest file; it is not listed among its own artifacts.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Fixed numeric format: 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Self::Num(x) => out.push_str(&fmt_f64(*x)),
            Self::Int(n) => write!(out, "{n}").expect("writing to a String"),
            Self::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    out.push('"');
                    out.push_str(&s.replace('"', "\"\""));
                    out.push('"');
                } else {
                    out.push_str(s);
                }
            }
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Self::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Self::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Self::Text(b.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Self::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::Text(s.to_string())
    }
}

/// CSV table with a fixed header.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns, "row width differs from header");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            c.render(&mut self.text);
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// A module-level validity check reported in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityFlag {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

/// Files and flags produced by one experiment.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    flags: Vec<ValidityFlag>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_csv(&mut self, name: &str, csv: Csv) {
        self.add_file(name, csv.into_bytes());
    }

    pub fn add_json(&mut self, name: &str, value: &impl Serialize) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("summary serializes");
        bytes.push(b'\n');
        self.add_file(name, bytes);
    }

    pub fn add_file(&mut self, name: &str, bytes: Vec<u8>) {
        assert!(
            name != MANIFEST_FILE && self.files.iter().all(|(n, _)| n != name),
            "artifact {name} emitted twice"
        );
        self.files.push((name.to_string(), bytes));
    }

    pub fn flag(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.flags.push(ValidityFlag {
            name: name.to_string(),
            ok,
            detail: detail.into(),
        });
    }

    pub fn files(&self) -> &[(String, Vec<u8>)] {
        &self.files
    }

    pub fn flags(&self) -> &[ValidityFlag] {
        &self.flags
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config: serde_json::Value,
    pub output_dir: PathBuf,
    pub artifacts: Vec<ArtifactEntry>,
    pub duration_seconds: f64,
    pub validity: Vec<ValidityFlag>,
}

impl RunManifest {
    pub fn all_valid(&self) -> bool {
        self.validity.iter().all(|f| f.ok)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every artifact into `dir` (created if needed) and returns the
/// manifest entries in emission order.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> std::io::Result<Vec<ArtifactEntry>> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(artifacts.files.len());
    for (name, bytes) in &artifacts.files {
        std::fs::write(dir.join(name), bytes)?;
        entries.push(ArtifactEntry {
            file: name.clone(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
    }
    Ok(entries)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    std::fs::write(dir.join(MANIFEST_FILE), bytes)
}
