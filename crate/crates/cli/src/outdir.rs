//! Output directory plumbing: atomic writers plus the reproducibility
//! stamps (resolved config, version, input checksums) every run emits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use nlscyl::error::Result;
use nlscyl::snapshot::{atomic_write, checksum_file};

use crate::config::RunConfig;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<OutDir> {
        fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn open_existing(root: &Path) -> Result<OutDir> {
        if !root.is_dir() {
            return Err(nlscyl::Error::config(
                "output.directory",
                format!("`{}` is not a directory", root.display()),
            ));
        }
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        atomic_write(&self.path(name), &bytes)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        atomic_write(&self.path(name), text.as_bytes())
    }

    /// Write a CSV file with a fixed header; cells are already formatted.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<()> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write_text(name, &text)
    }

    /// Reproducibility stamps: resolved config (all defaults explicit), a
    /// version stamp, and checksums of any input snapshot files.
    pub fn stamp(&self, resolved: &RunConfig, input_snapshots: &[&str]) -> Result<()> {
        self.write_json("resolved_config.json", resolved)?;
        self.write_json(
            "version.json",
            &serde_json::json!({
                "name": "nlscyl",
                "version": env!("CARGO_PKG_VERSION"),
            }),
        )?;
        let mut sums = Vec::new();
        for p in input_snapshots {
            sums.push(serde_json::json!({
                "path": p,
                "fnv1a64": checksum_file(Path::new(p))?,
            }));
        }
        self.write_json("checksums.json", &serde_json::json!({ "inputs": sums }))
    }
}

/// Format an f64 so the CSV round-trips bit-exactly.
pub fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}
