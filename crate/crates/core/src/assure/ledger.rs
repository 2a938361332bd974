use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::{Assurance, AssureError};
use crate::scenario::Technique;

/// Append-only JSON-lines store of assurances, one per line. Records are
/// never rewritten; `created_at` is the record's position in the file.
#[derive(Debug, Clone)]
pub struct Ledger {
    path: PathBuf,
}

impl Ledger {
    pub fn open(path: impl AsRef<Path>) -> Self {
        Ledger {
            path: path.as_ref().to_path_buf(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn io(&self, source: std::io::Error) -> AssureError {
        AssureError::Io {
            path: self.path.display().to_string(),
            source,
        }
    }

    /// Every record in file order. A missing file is an empty ledger.
    pub fn records(&self) -> Result<Vec<Assurance>, AssureError> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(self.io(e)),
        };
        let mut out = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| self.io(e))?;
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |message: String| AssureError::CorruptLedger { line: i + 1, message };
            let a: Assurance = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
            a.validate().map_err(|e| corrupt(e.to_string()))?;
            out.push(a);
        }
        Ok(out)
    }

    /// Validate, number and append. Returns the records as written.
    pub fn append(&self, assurances: &[Assurance]) -> Result<Vec<Assurance>, AssureError> {
        let start = self.records()?.len() as u64;
        let mut text = String::new();
        let mut written = Vec::with_capacity(assurances.len());
        for (i, a) in assurances.iter().enumerate() {
            a.validate()?;
            let mut a = a.clone();
            a.created_at = start + i as u64;
            text.push_str(&serde_json::to_string(&a).expect("assurance serializes"));
            text.push('\n');
            written.push(a);
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| self.io(e))?;
        file.write_all(text.as_bytes()).map_err(|e| self.io(e))?;
        Ok(written)
    }

    /// Records for `requirement`, optionally one technique, in file order.
    pub fn query(&self, requirement: &str, technique: Option<Technique>) -> Result<Vec<Assurance>, AssureError> {
        Ok(self
            .records()?
            .into_iter()
            .filter(|a| a.requirement == requirement && technique.is_none_or(|t| a.technique == t))
            .collect())
    }
}
