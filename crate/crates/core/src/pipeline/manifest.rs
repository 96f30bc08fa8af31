use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pipeline::RunConfig;

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn bytes_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Every regular file under `dir`, sorted, as paths relative to `root`.
pub(crate) fn list_files(root: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let entry = entry.map_err(|e| Error::io(&d, e))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap_or(&path).to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}

fn key(rel: &Path) -> String {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Digests of `files` (relative to `root`), keyed by `/`-separated path.
pub(crate) fn digest_map(root: &Path, files: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    files
        .iter()
        .map(|rel| {
            let full = if rel.is_absolute() { rel.clone() } else { root.join(rel) };
            Ok((key(rel), file_digest(&full)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
    /// Some cells or methods failed but the stage still produced output.
    pub partial: bool,
}

/// `<output_dir>/manifest.json`. The only artifact that carries timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: RunConfig,
    pub stages: BTreeMap<String, StageRecord>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn new(config: &RunConfig) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            stages: BTreeMap::new(),
        }
    }

    pub fn load(out: &Path) -> Result<Self> {
        let path = out.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads the existing manifest (if any) with the config snapshot replaced.
    pub(crate) fn load_or_new(out: &Path, config: &RunConfig) -> Self {
        match RunManifest::load(out) {
            Ok(mut m) => {
                m.config = config.clone();
                m.tool_version = env!("CARGO_PKG_VERSION").to_string();
                m
            }
            Err(_) => RunManifest::new(config),
        }
    }

    pub fn save(&self, out: &Path) -> Result<()> {
        let path = out.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
    }

    /// Output files whose current digest differs from the recorded one
    /// (missing files included). Inputs outside `out` are not re-checked.
    pub fn verify(&self, out: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for record in self.stages.values() {
            for (rel, digest) in &record.outputs {
                let path = out.join(rel);
                match file_digest(&path) {
                    Ok(d) if &d == digest => {}
                    _ => bad.push(rel.clone()),
                }
            }
        }
        bad.sort();
        bad.dedup();
        Ok(bad)
    }
}
