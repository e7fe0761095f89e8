//! Deterministic CSV and JSON writers with embedded provenance.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{io_err, CliResult};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Files written by one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: Vec<PathBuf>,
    pub json: PathBuf,
}

pub fn output_dir(config: &ExperimentConfig, fallback: &Path) -> PathBuf {
    config.output.dir.clone().unwrap_or_else(|| fallback.to_path_buf())
}

pub fn stem(config: &ExperimentConfig) -> String {
    config.output.stem.clone().unwrap_or_else(|| config.name.clone())
}

/// CSV with a schema comment, a provenance comment and a header row.
pub fn write_csv<R: Serialize>(path: &Path, schema: &str, config: &ExperimentConfig, rows: &[R]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut buf = Vec::new();
    writeln!(buf, "# schema: {schema}").expect("in-memory write");
    writeln!(buf, "# config_hash: {} seed: {} version: {CODE_VERSION}", config.hash(), config.seed).expect("in-memory write");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(io_err(path))?;
    }
    fs::write(path, buf).map_err(io_err(path))
}

/// JSON sidecar holding the resolved config and any extra payload.
pub fn write_sidecar(path: &Path, schema: &str, config: &ExperimentConfig, files: &[PathBuf], payload: Value) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let names: Vec<String> =
        files.iter().map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()).collect();
    let doc = json!({
        "schema": schema,
        "config_hash": config.hash(),
        "seed": config.seed,
        "code_version": CODE_VERSION,
        "rng": nuosc::record::RNG_ALGORITHM,
        "config": config,
        "config_toml": config.to_toml(),
        "files": names,
        "data": payload,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Config embedded in a sidecar written by [`write_sidecar`].
pub fn config_from_sidecar(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let doc: Value = serde_json::from_str(&text)?;
    let toml = doc
        .get("config_toml")
        .and_then(Value::as_str)
        .ok_or_else(|| crate::error::CliError::Config(format!("{} carries no embedded config", path.display())))?;
    ExperimentConfig::from_toml(toml, &[])
}
