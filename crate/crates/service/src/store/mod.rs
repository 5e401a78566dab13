//! Append-only event log with periodic snapshots.
//!
//! `events.log` holds one JSON [`LogRecord`] per line. `snapshot.json` holds
//! `{v, state}` for some prefix of the log and is replaced atomically
//! (write to a temporary file, then rename). Opening the store loads the
//! snapshot and replays every later record. A final line without a newline
//! is a write cut short by a crash and is discarded.

mod state;

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use state::{
    Alert, AlertDraft, AlertEventKind, Event, HistoryEntry, LogRecord, Mutation, Outcome, RunRecord, RunStatus,
    RunSummary, StoreState, LOG_VERSION,
};

use crate::error::{Result, ServiceError};

const LOG_FILE: &str = "events.log";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    v: u32,
    state: StoreState,
}

pub struct Store {
    dir: PathBuf,
    log: File,
    state: StoreState,
    snapshot_every: u64,
    since_snapshot: u64,
}

/// Reads every complete record of a log file. A trailing partial line is
/// reported by its byte offset so the caller can cut it off.
pub fn read_log(path: &Path) -> Result<(Vec<LogRecord>, Option<u64>)> {
    let f = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), None)),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(f);
    let mut out = Vec::new();
    let mut offset = 0u64;
    let mut line = String::new();
    let mut n = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 {
            return Ok((out, None));
        }
        n += 1;
        if !line.ends_with('\n') {
            return Ok((out, Some(offset)));
        }
        let rec: LogRecord = serde_json::from_str(line.trim_end()).map_err(|e| ServiceError::CorruptLog {
            line: n,
            reason: e.to_string(),
        })?;
        out.push(rec);
        offset += read as u64;
    }
}

impl Store {
    pub fn open(dir: &Path, snapshot_every: u64) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut state = match fs::read(dir.join(SNAPSHOT_FILE)) {
            Ok(bytes) => {
                let snap: Snapshot = serde_json::from_slice(&bytes)?;
                if snap.v != LOG_VERSION {
                    return Err(ServiceError::CorruptLog {
                        line: 0,
                        reason: format!("snapshot version {}", snap.v),
                    });
                }
                snap.state
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => StoreState::default(),
            Err(e) => return Err(e.into()),
        };
        let log_path = dir.join(LOG_FILE);
        let (records, torn) = read_log(&log_path)?;
        if let Some(offset) = torn {
            log::warn!("discarding partial record at byte {offset} of {}", log_path.display());
            OpenOptions::new().write(true).open(&log_path)?.set_len(offset)?;
        }
        let mut replayed = 0;
        let from = state.seq;
        for r in records.iter().filter(|r| r.seq > from) {
            state.apply(r).map_err(|e| ServiceError::CorruptLog {
                line: r.seq as usize,
                reason: e.to_string(),
            })?;
            replayed += 1;
        }
        log::info!("store at seq {} ({replayed} records replayed)", state.seq);
        let log = OpenOptions::new().create(true).append(true).open(&log_path)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            log,
            state,
            snapshot_every,
            since_snapshot: replayed,
        })
    }

    pub fn state(&self) -> &StoreState {
        &self.state
    }

    pub fn log_path(&self) -> PathBuf {
        self.dir.join(LOG_FILE)
    }

    /// Sequence number the next record will get.
    pub fn next_seq(&self) -> u64 {
        self.state.seq + 1
    }

    /// Validates, appends and applies one event.
    pub fn commit(&mut self, event: Event, at: DateTime<Utc>) -> Result<Outcome> {
        Ok(self.commit_many(vec![event], at)?[0])
    }

    /// Validates every event in order, appends them with one flush, then
    /// applies them. Nothing is written if any event is rejected.
    pub fn commit_many(&mut self, events: Vec<Event>, at: DateTime<Utc>) -> Result<Vec<Outcome>> {
        let base = self.state.seq;
        let records: Vec<LogRecord> = events
            .into_iter()
            .enumerate()
            .map(|(i, event)| LogRecord {
                v: LOG_VERSION,
                seq: base + 1 + i as u64,
                at,
                event,
            })
            .collect();
        let mut ids: Vec<&str> = records.iter().map(|r| target(&r.event)).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut staged = Vec::with_capacity(records.len());
        if ids.len() == records.len() {
            // Independent events: validate against the live state.
            for r in &records {
                staged.push(self.state.plan(r)?);
            }
        } else {
            let mut copy = self.state.clone();
            for r in &records {
                let m = copy.plan(r)?;
                staged.push(m.clone());
                copy.install(r, m);
            }
        }

        let mut buf = Vec::new();
        for r in &records {
            serde_json::to_writer(&mut buf, r)?;
            buf.push(b'\n');
        }
        self.log.write_all(&buf)?;
        self.log.sync_data()?;

        let mut outcomes = Vec::with_capacity(records.len());
        for (r, m) in records.iter().zip(staged) {
            outcomes.push(match &m {
                Mutation::Alert(_, o) => *o,
                Mutation::Run(_) => Outcome::Changed,
            });
            self.state.install(r, m);
        }
        self.since_snapshot += outcomes.len() as u64;
        if self.since_snapshot >= self.snapshot_every {
            self.snapshot()?;
        }
        Ok(outcomes)
    }

    /// Writes the current state atomically.
    pub fn snapshot(&mut self) -> Result<()> {
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let bytes = serde_json::to_vec(&Snapshot {
            v: LOG_VERSION,
            state: self.state.clone(),
        })?;
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(SNAPSHOT_FILE))?;
        self.since_snapshot = 0;
        Ok(())
    }
}

/// Key of the entity an event mutates.
fn target(e: &Event) -> &str {
    match e {
        Event::AlertScored { alert } => &alert.id,
        Event::AlertEvent { alert_id, .. } => alert_id,
        Event::RunStarted { run_id, .. } | Event::RunFinished { run_id, .. } | Event::RunFailed { run_id, .. } => run_id,
    }
}
