//! CSV tables with a `#`-prefixed configuration echo, and the JSON run
//! manifest with checksums of everything written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Twelve significant digits; non-finite values spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Kappa as a column suffix: `1`, `2`, `1.5`.
pub fn kappa_label(k: f64) -> String {
    format!("{k}")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Render with the comment header (one `# ` line per echo line).
    pub fn render(&self, echo: &str) -> std::io::Result<Vec<u8>> {
        let mut buf = Vec::new();
        for line in echo.lines() {
            writeln!(buf, "# {line}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointStatus {
    pub x: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_modes: Option<usize>,
}

impl PointStatus {
    pub fn ok(x: f64, zero_modes: Option<usize>) -> Self {
        Self {
            x,
            status: "ok",
            reason: None,
            zero_modes,
        }
    }

    pub fn failed(x: f64, reason: String) -> Self {
        Self {
            x,
            status: "failed",
            reason: Some(reason),
            zero_modes: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub workers: usize,
    pub wall_time_s: f64,
    pub points: Vec<PointStatus>,
    pub zero_modes_total: usize,
    pub files: Vec<FileEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes files into the output directory and remembers their checksums.
pub struct OutputDir {
    root: PathBuf,
    pub files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        fs::write(self.root.join(name), bytes)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table, echo: &str) -> std::io::Result<()> {
        let bytes = table.render(echo)?;
        self.write(name, &bytes)
    }
}

/// Re-hash every file listed in a manifest; returns the mismatching paths.
pub fn verify_manifest(dir: &Path, manifest: &serde_json::Value) -> std::io::Result<Vec<String>> {
    let mut bad = Vec::new();
    if let Some(files) = manifest.get("files").and_then(|f| f.as_array()) {
        for f in files {
            let path = f["path"].as_str().unwrap_or_default();
            let want = f["sha256"].as_str().unwrap_or_default();
            let got = sha256_hex(&fs::read(dir.join(path))?);
            if got != want {
                bad.push(path.to_string());
            }
        }
    }
    Ok(bad)
}
