//! Data files and the run manifest.
//!
//! CSV cells use Rust's shortest round-trip float formatting, so reading a
//! file back gives the in-memory values bit for bit. Dense fields are raw
//! little-endian `f64`, row-major, with dimensions recorded in the manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn push_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Int(v) => write!(out, "{v}").unwrap(),
        Cell::Float(v) => write!(out, "{v:?}").unwrap(),
        Cell::Text(v) => out.push_str(v),
    }
}

/// Entry of [`Manifest::files`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub name: String,
    /// Data rows (CSV rows after the header, or field rows).
    pub rows: usize,
    /// `[rows, columns]` for binary fields.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dims: Option<[usize; 2]>,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    pub mode: String,
    pub config: BTreeMap<String, String>,
    pub duration_seconds: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}

/// Output directory that remembers what was written to it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8], rows: usize, dims: Option<[usize; 2]>) -> Result<()> {
        let entry = write_file(&self.root, name, bytes, rows, dims)?;
        self.files.push(entry);
        Ok(())
    }

    /// Lists a file written elsewhere (for example by a sweep worker).
    pub fn record(&mut self, entry: FileEntry) {
        self.files.push(entry);
    }

    /// Writes `header` then one line per row. Rows must match the header width.
    pub fn write_csv<R>(&mut self, name: &str, header: &str, rows: R) -> Result<usize>
    where
        R: IntoIterator<Item = Vec<Cell>>,
    {
        let text = csv_text(header, rows)?;
        let n = text.lines().count() - 1;
        self.write_bytes(name, text.as_bytes(), n, None)?;
        Ok(n)
    }

    /// Copies already-formatted CSV text, counting its data rows.
    pub fn write_csv_text(&mut self, name: &str, text: &str) -> Result<usize> {
        let n = text.lines().count().saturating_sub(1);
        self.write_bytes(name, text.as_bytes(), n, None)?;
        Ok(n)
    }

    pub fn write_field(&mut self, name: &str, values: &[f64], rows: usize, cols: usize) -> Result<()> {
        if values.len() != rows * cols {
            bail!("field {name}: {} values for {rows} x {cols}", values.len());
        }
        let mut bytes = Vec::with_capacity(values.len() * 8);
        for v in values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        self.write_bytes(name, &bytes, rows, Some([rows, cols]))
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let text = serde_json::to_string_pretty(manifest)?;
        fs::write(self.root.join(MANIFEST_NAME), text + "\n")?;
        Ok(())
    }
}

/// Writes `bytes` to `root/name` and describes the result.
pub fn write_file(root: &Path, name: &str, bytes: &[u8], rows: usize, dims: Option<[usize; 2]>) -> Result<FileEntry> {
    let path = root.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(FileEntry {
        name: name.to_string(),
        rows,
        dims,
        sha256: sha256_hex(bytes),
    })
}

/// CSV text for `header` and `rows`.
pub fn csv_text<R>(header: &str, rows: R) -> Result<String>
where
    R: IntoIterator<Item = Vec<Cell>>,
{
    let width = header.split(',').count();
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        if row.len() != width {
            bail!("row has {} cells, header `{header}` has {width}", row.len());
        }
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                text.push(',');
            }
            push_cell(&mut text, cell);
        }
        text.push('\n');
    }
    Ok(text)
}

/// Parsed CSV: header columns and raw cell strings.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column `name` parsed as `f64`.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name).with_context(|| format!("no column `{name}`"))?;
        self.rows
            .iter()
            .map(|r| r[i].parse::<f64>().with_context(|| format!("bad number `{}`", r[i])))
            .collect()
    }
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .context("empty CSV")?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    if let Some(bad) = rows.iter().find(|r| r.len() != header.len()) {
        bail!("row `{}` does not match header width {}", bad.join(","), header.len());
    }
    Ok(CsvTable { header, rows })
}

pub fn read_field(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() % 8 != 0 {
        bail!("{}: length {} is not a multiple of 8", path.display(), bytes.len());
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_round_trip() {
        let vals = [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 3.989422804014327e-1, 0.0];
        let text = csv_text("x", vals.iter().map(|&v| vec![Cell::from(v)])).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, vals);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        assert!(csv_text("a,b", [vec![Cell::Int(1)]]).is_err());
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
