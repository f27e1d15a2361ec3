//! Artifact writing and the machine-readable run manifest.
//!
//! Every command collects its outputs through an [`ArtifactSink`] and writes
//! `run_manifest.json` last, so a manifest on disk means the run completed
//! and its absence marks a partial run.

use anyhow::{Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: serde_json::Value,
    /// Scalar results keyed by name; BTreeMap keeps the serialization
    /// order stable.
    pub metrics: std::collections::BTreeMap<String, serde_json::Value>,
    pub artifacts: Vec<String>,
}

pub struct ArtifactSink {
    out_dir: PathBuf,
    manifest: Manifest,
}

impl ArtifactSink {
    pub fn new(command: &str, out_dir: &Path, config: &impl Serialize) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            manifest: Manifest {
                command: command.to_string(),
                config: serde_json::to_value(config)?,
                metrics: Default::default(),
                artifacts: Vec::new(),
            },
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Writes one artifact file under the output directory.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents.as_ref())
            .with_context(|| format!("writing {}", path.display()))?;
        self.manifest.artifacts.push(name.to_string());
        Ok(path)
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        self.manifest
            .metrics
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable metric"));
    }

    /// Finalises the run by writing the manifest; call once, last.
    pub fn finish(mut self) -> Result<()> {
        let body = serde_json::to_string_pretty(&self.manifest)?;
        let path = self.out_dir.join("run_manifest.json");
        self.manifest.artifacts.push("run_manifest.json".into());
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Two-column CSV (plus header) from label/value rows.
pub fn two_column_csv(header: (&str, &str), rows: impl Iterator<Item = (String, String)>) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (a, b) in rows {
        out.push_str(&a);
        out.push(',');
        out.push_str(&b);
        out.push('\n');
    }
    out
}
