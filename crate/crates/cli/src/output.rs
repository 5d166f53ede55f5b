//! Output files, each with a `<file>.meta.json` sidecar holding the
//! resolved config and a SHA-256 digest of the file's bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub struct Outputs {
    dir: PathBuf,
    config: Value,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, config: Value) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let meta = json!({
            "file": name,
            "sha256": sha256_hex(bytes),
            "bytes": bytes.len(),
            "generator": concat!("twobath ", env!("CARGO_PKG_VERSION")),
            "config": self.config,
        });
        let side = self.dir.join(format!("{name}.meta.json"));
        let text = serde_json::to_string_pretty(&meta).expect("sidecar serializes") + "\n";
        fs::write(&side, text).map_err(|e| Failure::Io(format!("{}: {e}", side.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// CSV produced by one of the library writers.
    pub fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut Vec<u8>) -> twobath::Result<()>,
    ) -> Result<(), Failure> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.bytes(name, &buf)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::Numerical(format!("{name}: {e}")))?;
        self.bytes(name, (text + "\n").as_bytes())
    }
}
