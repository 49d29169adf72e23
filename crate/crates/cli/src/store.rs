//! Append-only JSON-lines run store.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use qnad_core::evalstats::RunResult;

pub struct RunStore {
    path: PathBuf,
}

impl RunStore {
    pub fn new(dir: &Path) -> Self {
        Self {
            path: dir.join("runs.jsonl"),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn load(&self) -> anyhow::Result<Vec<RunResult>> {
        if !self.path.exists() {
            return Ok(Vec::new());
        }
        let text = std::fs::read_to_string(&self.path)
            .with_context(|| format!("reading run store {}", self.path.display()))?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: RunResult = serde_json::from_str(line)
                .with_context(|| format!("run store line {} is corrupt", i + 1))?;
            records.push(record);
        }
        Ok(records)
    }

    /// Append records, skipping any whose identity
    /// (config, dataset, seed, protocol, hash) is already stored; runs are
    /// deterministic, so an existing record is the same record. Returns
    /// (appended, skipped).
    pub fn append(&self, records: &[RunResult]) -> anyhow::Result<(usize, usize)> {
        let existing: HashSet<String> =
            self.load()?.iter().map(identity_key).collect();
        if let Some(parent) = self.path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .with_context(|| format!("opening run store {}", self.path.display()))?;
        let mut appended = 0;
        let mut skipped = 0;
        for record in records {
            if existing.contains(&identity_key(record)) {
                skipped += 1;
                continue;
            }
            serde_json::to_writer(&mut file, record)?;
            file.write_all(b"\n")?;
            appended += 1;
        }
        Ok((appended, skipped))
    }
}

fn identity_key(r: &RunResult) -> String {
    format!(
        "{}|{}|{}|{}|{}",
        r.dataset_id,
        r.config_id,
        r.seed,
        r.protocol.key(),
        r.config_hash
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use qnad_core::evalstats::Protocol;
    use qnad_core::models::{Detection, Family};

    fn record(seed: u64, auroc: f64) -> RunResult {
        let template = qnad_core::models::ConfigTemplate::default();
        let mut cfg = template.config("synthetic", Family::Classical);
        cfg.seed = seed;
        RunResult::new(
            &cfg,
            Detection::ReconThreshold,
            Protocol::FullTest,
            auroc,
            1,
            "hash",
        )
    }

    #[test]
    fn round_trip_and_duplicate_skip() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::new(dir.path());
        assert!(store.load().unwrap().is_empty());

        let (appended, skipped) = store.append(&[record(0, 0.9), record(1, 0.8)]).unwrap();
        assert_eq!((appended, skipped), (2, 0));

        // Re-appending the same identities is a no-op.
        let (appended, skipped) = store.append(&[record(0, 0.9), record(2, 0.7)]).unwrap();
        assert_eq!((appended, skipped), (1, 1));

        let records = store.load().unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].seed, 0);
        assert_eq!(records[0].auroc, 0.9);
    }
}
