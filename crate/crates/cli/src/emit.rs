//! Deterministic file emission.
//!
//! Every artifact is reproducible byte-for-byte from the config alone: floats
//! are printed with fixed precision, maps iterate in key order, and nothing
//! records wall-clock time or host identity. `provenance.txt` ties an output
//! directory back to the exact config text that produced it.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use sdsim_core::diagnostics::{write_records_csv, DiagnosticsRecord};

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Pretty JSON with a trailing newline; key order is the struct field
    /// order, so reruns are byte-identical.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn write_records(&self, name: &str, records: &[DiagnosticsRecord]) -> Result<()> {
        let mut buf = Vec::new();
        write_records_csv(records, &mut buf)?;
        self.write_bytes(name, &buf)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        self.write_bytes(name, text.as_bytes())
    }

    /// Tool version plus the verbatim config text. No timestamps.
    pub fn write_provenance(&self, config_text: &str) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("tool: sdsim {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str("config:\n");
        out.push_str(config_text);
        if !config_text.ends_with('\n') {
            out.push('\n');
        }
        self.write_text("provenance.txt", &out)
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        let mut file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        file.write_all(bytes)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
