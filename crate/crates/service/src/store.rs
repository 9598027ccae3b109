//! Append-only NDJSON submission log.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use graspgen_core::{FailureReason, TrialOutcome};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: corrupt submission record: {msg}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

/// The grasp as submitted, in API units: pixels and degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubmittedGrasp {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub opening: f64,
    pub jaw_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub submission_id: u64,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub scene_id: String,
    pub grasp: SubmittedGrasp,
    pub outcome: TrialOutcome,
    pub client: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tally {
    pub trials: u64,
    pub successes: u64,
}

impl Tally {
    fn add(&mut self, success: bool) {
        self.trials += 1;
        self.successes += u64::from(success);
    }

    pub fn success_rate(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.successes as f64 / self.trials as f64)
    }
}

/// Running totals over every record in the log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub total: Tally,
    pub by_scene: BTreeMap<String, Tally>,
    pub failure_reasons: BTreeMap<FailureReason, u64>,
}

impl Stats {
    fn record(&mut self, s: &Submission) {
        self.total.add(s.outcome.success);
        self.by_scene
            .entry(s.scene_id.clone())
            .or_default()
            .add(s.outcome.success);
        if let Some(r) = s.outcome.failure_reason {
            *self.failure_reasons.entry(r).or_default() += 1;
        }
    }
}

/// Single writer for the log; callers serialize access through a mutex.
pub struct SubmissionLog {
    path: PathBuf,
    file: File,
    next_id: u64,
    stats: Stats,
}

impl SubmissionLog {
    /// Opens or creates the log, replaying existing records so ids continue
    /// where the previous run stopped.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let io = |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut stats = Stats::default();
        let mut next_id = 1;
        let regular = std::fs::metadata(path)
            .map(|m| m.is_file())
            .unwrap_or(false);
        if regular {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let s: Submission =
                    serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                        path: path.to_path_buf(),
                        line: i + 1,
                        msg: e.to_string(),
                    })?;
                next_id = next_id.max(s.submission_id + 1);
                stats.record(&s);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        Ok(SubmissionLog {
            path: path.to_path_buf(),
            file,
            next_id,
            stats,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    /// Assigns the next id and makes the record durable before returning it.
    /// On failure the file is cut back so no partial record remains.
    pub fn append(
        &mut self,
        timestamp: u64,
        scene_id: &str,
        grasp: SubmittedGrasp,
        outcome: TrialOutcome,
        client: Option<String>,
    ) -> Result<Submission, StoreError> {
        let sub = Submission {
            submission_id: self.next_id,
            timestamp,
            scene_id: scene_id.to_string(),
            grasp,
            outcome,
            client,
        };
        let mut line = serde_json::to_vec(&sub).expect("submission serializes");
        line.push(b'\n');
        let before = self.file.metadata().map(|m| m.len()).ok();
        let written = self
            .file
            .write_all(&line)
            .and_then(|_| self.file.flush())
            .and_then(|_| self.file.sync_data());
        if let Err(source) = written {
            if let Some(len) = before {
                if let Err(e) = self.file.set_len(len) {
                    log::error!(
                        "{}: cannot roll back partial record: {e}",
                        self.path.display()
                    );
                }
            }
            return Err(StoreError::Io {
                path: self.path.clone(),
                source,
            });
        }
        self.next_id += 1;
        self.stats.record(&sub);
        Ok(sub)
    }
}
