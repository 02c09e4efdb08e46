//! Deterministic CSV and JSON artifacts plus a run manifest.

use super::config::{ExperimentConfig, RawConfig};
use super::experiments::{Artifact, Table};
use crate::error::{Error, Result};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.json";

fn write_table(dir: &Path, table: &Table) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::io(&path, e))?;
    w.write_record(&table.header).map_err(|e| Error::io(&path, e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.render())).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Writes every table, the `<experiment>.json` summary and the manifest
/// into `cfg.out`. Returns the paths written, manifest last.
///
/// Everything except the manifest is byte-identical across repeated runs.
pub fn write_artifacts(cfg: &ExperimentConfig, raw: &RawConfig, artifact: &Artifact) -> Result<Vec<PathBuf>> {
    let dir = &cfg.out;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for t in &artifact.tables {
        written.push(write_table(dir, t)?);
    }
    let summary_path = dir.join(format!("{}.json", artifact.experiment.name()));
    write_json(
        &summary_path,
        &json!({
            "experiment": artifact.experiment,
            "config": cfg,
            "summary": artifact.summary,
            "checks": artifact.checks,
        }),
    )?;
    written.push(summary_path);

    let manifest_path = dir.join(MANIFEST);
    let files: Vec<String> = written.iter().map(|p| file_name(p)).collect();
    let total: f64 = artifact.timings.iter().map(|t| t.seconds).sum();
    write_json(
        &manifest_path,
        &json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": artifact.experiment,
            "config": cfg,
            "raw_config": raw,
            "files": files,
            "checks_passed": artifact.checks.iter().all(|c| c.passed),
            "checks": artifact.checks,
            "wall_seconds": { "total": total, "solves": artifact.timings },
        }),
    )?;
    written.push(manifest_path);
    Ok(written)
}
