//! Report files with content checksums.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::exit::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct ReportFile {
    pub file: String,
    pub sha256: String,
}

pub struct ReportDir {
    dir: PathBuf,
    pub files: Vec<ReportFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl ReportDir {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(ReportDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), Failure> {
        let path = self.path(name);
        std::fs::write(&path, &bytes).map_err(|e| Failure::io(&path, e))?;
        self.files.push(ReportFile {
            file: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_failure = |e: csv::Error| Failure::resource(format!("csv {name}: {e}"));
        w.write_record(header).map_err(to_failure)?;
        for r in rows {
            w.write_record(r).map_err(to_failure)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Failure::resource(format!("csv {name}: {e}")))?;
        self.write(name, bytes)
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, records: &[T]) -> Result<(), Failure> {
        let mut bytes = Vec::new();
        for r in records {
            serde_json::to_writer(&mut bytes, r)
                .map_err(|e| Failure::resource(format!("json {name}: {e}")))?;
            bytes.push(b'\n');
        }
        self.write(name, bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| Failure::resource(format!("json {name}: {e}")))?;
        bytes.push(b'\n');
        let path = self.path(name);
        std::fs::write(&path, &bytes).map_err(|e| Failure::io(&path, e))
    }
}

pub fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}
