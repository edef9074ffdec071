use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A rectangular table of already-formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses a column back into numbers (`inf` and `nan` included).
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].parse::<f64>().ok()).collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes the CSV; the parent directory must already exist.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        ensure_parent(path)?;
        fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(Error::Io(format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

/// Provenance written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_sha256: String,
    pub version: String,
    pub output: String,
    pub effective_config: String,
}

impl Manifest {
    pub fn new(seed: u64, effective_config: &str, output: &Path) -> Self {
        let digest = Sha256::digest(effective_config.as_bytes());
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Manifest {
            seed,
            config_sha256,
            version: crate::VERSION.to_string(),
            output: output.display().to_string(),
            effective_config: effective_config.to_string(),
        }
    }

    /// `<output>.manifest.toml`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.toml");
        PathBuf::from(name)
    }

    pub fn write(&self, output: &Path) -> Result<PathBuf> {
        let path = Self::path_for(output);
        ensure_parent(&path)?;
        let text = toml::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&path, text)?;
        Ok(path)
    }
}
