//! Sidecar describing how a CSV was produced. Everything in it is
//! deterministic, including a digest of the CSV itself, so two equal
//! manifests guarantee equal CSV bytes. Wall time goes to stderr.

use crate::error::Result;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Default)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    /// `(file name, sha256)`.
    pub inputs: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn render(&self, csv: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        let _ = writeln!(s, "library=qthermal {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k}={v}");
        }
        for (k, v) in &self.seeds {
            let _ = writeln!(s, "seed.{k}={v}");
        }
        for (name, digest) in &self.inputs {
            let _ = writeln!(s, "input.{name}=sha256:{digest}");
        }
        let digest: String = Sha256::digest(csv.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let _ = writeln!(s, "csv=sha256:{digest}");
        s
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// CSV to `out` (or stdout) with the manifest next to it (or on stderr).
pub fn emit(out: Option<&Path>, csv: &str, manifest: &RunManifest) -> Result<()> {
    let text = manifest.render(csv);
    match out {
        Some(path) => {
            std::fs::write(path, csv)?;
            std::fs::write(manifest_path(path), text)?;
        }
        None => {
            std::io::stdout().lock().write_all(csv.as_bytes())?;
            std::io::stderr().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}
