//! Run manifest: every tunable, input digest, solver diagnostic, and
//! metric of a run, in a flat ordered key-value file. Re-running with the
//! same configuration and inputs reproduces the manifest byte for byte,
//! which is how reproducibility is audited.

use std::path::Path;

use super::PipelineError;

pub const MANIFEST_HEADER: &str = "sixlead-manifest v1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new() -> Self {
        let mut m = Self::default();
        m.push("tool_version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn extend(&mut self, pairs: impl IntoIterator<Item = (String, String)>) {
        self.entries.extend(pairs);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(64 * self.entries.len());
        out.push_str(MANIFEST_HEADER);
        out.push('\n');
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push(' ');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PipelineError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(MANIFEST_HEADER) => {}
            other => {
                return Err(PipelineError::Config(format!(
                    "not a manifest: first line {other:?}"
                )))
            }
        }
        let mut entries = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            match line.split_once(' ') {
                Some((k, v)) => entries.push((k.to_string(), v.to_string())),
                None => entries.push((line.to_string(), String::new())),
            }
        }
        Ok(Self { entries })
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        std::fs::write(path, self.to_text()).map_err(|e| super::io_err(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| super::io_err(path, e))?;
        Self::from_text(&text)
    }
}

/// SHA-256 digest of a file, lowercase hex.
pub fn file_digest(path: &Path) -> Result<String, PipelineError> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| super::io_err(path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_and_looks_up() {
        let mut m = RunManifest::new();
        m.push("config.lambda", 0.01);
        m.push("metrics.test.I.pearson", 0.997);
        let text = m.to_text();
        let back = RunManifest::from_text(&text).unwrap();
        assert_eq!(back.get("config.lambda"), Some("0.01"));
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_foreign_text() {
        assert!(RunManifest::from_text("something else\n").is_err());
    }
}
