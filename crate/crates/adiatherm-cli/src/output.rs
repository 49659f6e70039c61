//! Result serialization: CSV tables plus a JSON run manifest.
//!
//! Floats are written as `{:.16e}` (17 significant digits — round-trip exact
//! for f64); integer-kind columns are written as plain integers. Files land
//! via write-temp-then-rename in the destination directory, so readers never
//! observe a half-written table. CSV bytes are a pure function of the config;
//! only the manifest's runtime field varies between reruns.

use crate::config::ConfigFile;
use adiatherm::protocol::{ColumnKind, SweepResult};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Provenance record written alongside every CSV.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    /// SHA-256 of the canonicalized (struct-ordered JSON) config; stable
    /// under TOML key reordering, changed by any field change.
    pub config_sha256: String,
    pub config: &'a ConfigFile,
    pub runtime_seconds: f64,
    pub warnings: &'a [String],
    pub outputs: Vec<String>,
}

/// Canonical content hash of a parsed config.
pub fn config_hash(cfg: &ConfigFile) -> String {
    let canon = serde_json::to_string(cfg).expect("config serializes to JSON");
    let digest = Sha256::digest(canon.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

pub fn render_csv(result: &SweepResult) -> String {
    let mut text = String::new();
    text.push_str(&result.columns.join(","));
    text.push('\n');
    for row in &result.rows {
        for (i, (&v, kind)) in row.iter().zip(&result.kinds).enumerate() {
            if i > 0 {
                text.push(',');
            }
            match kind {
                ColumnKind::Integer => text.push_str(&format!("{}", v as i64)),
                ColumnKind::Float => text.push_str(&format!("{v:.16e}")),
            }
        }
        text.push('\n');
    }
    text
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Write the CSV and manifest; returns the paths written.
pub fn write_outputs(
    out_dir: &Path,
    cfg: &ConfigFile,
    subcommand: &str,
    result: &SweepResult,
    runtime: Duration,
) -> std::io::Result<(PathBuf, PathBuf)> {
    let csv_path = out_dir.join(&cfg.output.csv);
    let manifest_name = cfg.output.manifest.clone().unwrap_or_else(|| {
        let stem = Path::new(&cfg.output.csv)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".to_string());
        format!("{stem}.manifest.json")
    });
    let manifest_path = match Path::new(&manifest_name).parent() {
        Some(p) if !p.as_os_str().is_empty() => out_dir.join(&manifest_name),
        _ => csv_path
            .parent()
            .unwrap_or(Path::new("."))
            .join(&manifest_name),
    };

    atomic_write(&csv_path, render_csv(result).as_bytes())?;

    let manifest = RunManifest {
        tool: "adiatherm",
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        config_sha256: config_hash(cfg),
        config: cfg,
        runtime_seconds: runtime.as_secs_f64(),
        warnings: &result.warnings,
        outputs: vec![csv_path.display().to_string()],
    };
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    atomic_write(&manifest_path, body.as_bytes())?;
    Ok((csv_path, manifest_path))
}
