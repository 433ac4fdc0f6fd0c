//! Output directory handling: fixed-format CSV, JSON files and the run manifest.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use eit_core::SystemConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

/// 17 significant digits in scientific notation; non-finite values as `nan`/`inf`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub struct CsvWriter {
    inner: BufWriter<fs::File>,
}

impl CsvWriter {
    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        self.inner.write_all(fields.join(",").as_bytes())?;
        self.inner.write_all(b"\n")
    }

    pub fn nums(&mut self, values: &[f64]) -> io::Result<()> {
        self.row(&values.iter().map(|&v| num(v)).collect::<Vec<_>>())
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Everything a subcommand writes goes through this, so the manifest lists
/// exactly the files produced and is written after all of them.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.root.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str]) -> io::Result<CsvWriter> {
        let file = fs::File::create(self.path(name))?;
        let mut w = CsvWriter {
            inner: BufWriter::new(file),
        };
        w.row(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
        Ok(w)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.path(name), text)
    }

    pub fn finish(self, subcommand: &str, config: &SystemConfig, extra: serde_json::Value) -> io::Result<()> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            subcommand,
            input_sha256: config_hash(config),
            config,
            parameters: extra,
            outputs: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST), text)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    timestamp: String,
    subcommand: &'a str,
    /// SHA-256 of the resolved config serialized as compact JSON.
    input_sha256: String,
    config: &'a SystemConfig,
    parameters: serde_json::Value,
    outputs: &'a [String],
}

pub fn config_hash(config: &SystemConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.0000000000000000e-1");
        assert_eq!(num(-1.0 / 3.0), "-3.3333333333333331e-1");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn hash_tracks_config() {
        let a = SystemConfig::default();
        let b = SystemConfig {
            delta31: 0.1,
            ..a.clone()
        };
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
