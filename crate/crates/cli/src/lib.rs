//! Library half of the `axionkit` tool: configuration handling, the
//! subcommand implementations and artifact output. The binary adds argument
//! parsing on top.

use std::path::{Path, PathBuf};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use error::CliError;

use config::RunConfig;
use output::Manifest;

/// Runs `command` and writes its artifacts and manifest to the configured
/// output directory. Returns the manifest and the human-readable summary.
pub fn run_and_write(command: &str, cfg: &RunConfig) -> Result<(Manifest, Vec<String>), CliError> {
    let art = commands::run(command, cfg)?;
    let manifest = output::write_all(&cfg.output.directory, command, cfg, &art)?;
    Ok((manifest, art.summary))
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub command: String,
    pub files: usize,
    pub directory: PathBuf,
}

/// Re-runs the invocation recorded in `manifest_path` into `out` (default
/// `<manifest dir>/replay`) and checks every regenerated file against the
/// recorded size and hash.
pub fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<ReplayReport, CliError> {
    let manifest = output::read_manifest(manifest_path)?;
    let mut cfg: RunConfig = manifest.config.clone();
    cfg.validate()?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => manifest_path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    cfg.output.directory = dir.clone();
    let (fresh, _) = run_and_write(&manifest.command, &cfg)?;
    let mut mismatches = Vec::new();
    for old in &manifest.files {
        match fresh.files.iter().find(|f| f.name == old.name) {
            Some(new) if new.fnv1a == old.fnv1a && new.bytes == old.bytes => {}
            Some(_) => mismatches.push(format!("{} differs", old.name)),
            None => mismatches.push(format!("{} was not regenerated", old.name)),
        }
    }
    if !mismatches.is_empty() {
        return Err(CliError::Mismatch(mismatches.join("; ")));
    }
    Ok(ReplayReport { command: manifest.command, files: manifest.files.len(), directory: dir })
}
