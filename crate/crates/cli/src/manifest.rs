use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Everything needed to reproduce a run. Contains no timestamps or host
/// details, so re-running it yields a byte-identical file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, minus `--out-dir`.
    pub argv: Vec<String>,
    pub parameters: Value,
    pub seed: u64,
    pub jobs: usize,
    pub tolerance: f64,
    pub max_iters: usize,
    pub versions: Versions,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub regsvm: String,
    pub model_format: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            regsvm: env!("CARGO_PKG_VERSION").to_string(),
            model_format: regsvm_core::svm::FORMAT_TAG.to_string(),
        }
    }
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(dir.join(MANIFEST_NAME), text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))
    }
}

/// Drops `--out-dir X` / `--out-dir=X` so a manifest can be replayed into
/// another directory.
pub fn strip_out_dir(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out-dir" {
            skip = true;
            continue;
        }
        if a.starts_with("--out-dir=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
