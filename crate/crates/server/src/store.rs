// SPDX-License-Identifier: Apache-2.0

//! Append-only JSONL event logs, one file per session or game.
//!
//! Every append is a single `write_all` followed by `sync_data`, so a record
//! is either fully on disk or (after a crash mid-write) a torn final line
//! that recovery trims. Snapshots are written beside the log with a
//! write-then-rename and only ever shortcut replay; the log stays complete.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Created,
    Prompt,
    Footprint,
    LimitChange,
    GameAction,
    GameEvent,
    Deleted,
}

/// One line of a log file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub ts: String,
    pub id: String,
    pub kind: EventKind,
    pub payload: Value,
}

impl EventRecord {
    pub fn new(id: &str, kind: EventKind, payload: impl Serialize) -> Result<Self, StoreError> {
        Ok(Self {
            ts: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            id: id.to_owned(),
            kind,
            payload: serde_json::to_value(payload)?,
        })
    }

    pub fn payload_as<T: DeserializeOwned>(&self) -> Result<T, StoreError> {
        Ok(serde_json::from_value(self.payload.clone())?)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("bad record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Sessions,
    Games,
}

impl Stream {
    fn dir(self) -> &'static str {
        match self {
            Stream::Sessions => "sessions",
            Stream::Games => "games",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Snapshot<T> {
    /// Number of log records folded into `state`.
    pub records: u64,
    pub state: T,
}

#[derive(Debug, Clone)]
pub struct EventStore {
    root: PathBuf,
}

impl EventStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for stream in [Stream::Sessions, Stream::Games] {
            let dir = root.join(stream.dir());
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn log_path(&self, stream: Stream, id: &str) -> PathBuf {
        self.root.join(stream.dir()).join(format!("{id}.jsonl"))
    }

    fn snapshot_path(&self, stream: Stream, id: &str) -> PathBuf {
        self.root.join(stream.dir()).join(format!("{id}.snapshot.json"))
    }

    /// Appends `records` with one write and one fsync.
    pub fn append(&self, stream: Stream, id: &str, records: &[EventRecord]) -> Result<(), StoreError> {
        let mut buf = Vec::new();
        for r in records {
            serde_json::to_writer(&mut buf, r)?;
            buf.push(b'\n');
        }
        let path = self.log_path(stream, id);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        file.write_all(&buf).map_err(io_err(&path))?;
        file.sync_data().map_err(io_err(&path))
    }

    /// Ids with a log file in `stream`, sorted.
    pub fn list(&self, stream: Stream) -> Result<Vec<String>, StoreError> {
        let dir = self.root.join(stream.dir());
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let name = entry.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".jsonl")) {
                ids.push(id.to_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Reads a log, trimming a torn final line left by a crash mid-append.
    pub fn read(&self, stream: Stream, id: &str) -> Result<Vec<EventRecord>, StoreError> {
        let path = self.log_path(stream, id);
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io_err(&path))?;
        if !text.is_empty() && !text.ends_with('\n') {
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            tracing::warn!(path = %path.display(), "dropping torn final record");
            file.set_len(keep as u64).map_err(io_err(&path))?;
            file.seek(SeekFrom::End(0)).map_err(io_err(&path))?;
            file.sync_data().map_err(io_err(&path))?;
            text.truncate(keep);
        }
        parse_lines(&path, &text)
    }

    pub fn write_snapshot<T: Serialize>(
        &self,
        stream: Stream,
        id: &str,
        snapshot: &Snapshot<T>,
    ) -> Result<(), StoreError> {
        let path = self.snapshot_path(stream, id);
        let tmp = path.with_extension("json.tmp");
        let bytes = serde_json::to_vec(snapshot)?;
        let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(&bytes).map_err(io_err(&tmp))?;
        file.sync_data().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }

    /// A missing or unreadable snapshot is not an error: replay covers it.
    pub fn read_snapshot<T: DeserializeOwned>(&self, stream: Stream, id: &str) -> Option<Snapshot<T>> {
        let path = self.snapshot_path(stream, id);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(s) => Some(s),
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "ignoring unreadable snapshot");
                None
            }
        }
    }
}

/// Parses JSONL text, naming the 1-based line of the first bad record.
pub fn parse_lines(path: &Path, text: &str) -> Result<Vec<EventRecord>, StoreError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
                path: path.to_owned(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn append_read_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let store = EventStore::open(dir.path()).unwrap();
        let r = EventRecord::new("s1", EventKind::Created, json!({"a": 1})).unwrap();
        store.append(Stream::Sessions, "s1", &[r.clone(), r.clone()]).unwrap();
        assert_eq!(store.read(Stream::Sessions, "s1").unwrap().len(), 2);

        let path = store.log_path(Stream::Sessions, "s1");
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"ts":"x","id":"s1","ki"#).unwrap();
        drop(f);
        assert_eq!(store.read(Stream::Sessions, "s1").unwrap().len(), 2);
        store.append(Stream::Sessions, "s1", &[r]).unwrap();
        assert_eq!(store.read(Stream::Sessions, "s1").unwrap().len(), 3);
        assert_eq!(store.list(Stream::Sessions).unwrap(), vec!["s1"]);
    }

    #[test]
    fn corrupt_line_is_named() {
        let text = "{\"ts\":\"t\",\"id\":\"a\",\"kind\":\"created\",\"payload\":{}}\nnot json\n";
        let err = parse_lines(Path::new("x.jsonl"), text).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn snapshots_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = EventStore::open(dir.path()).unwrap();
        store
            .write_snapshot(Stream::Games, "g", &Snapshot { records: 3, state: 0.1f64 + 0.2 })
            .unwrap();
        let s: Snapshot<f64> = store.read_snapshot(Stream::Games, "g").unwrap();
        assert_eq!((s.records, s.state), (3, 0.1 + 0.2));
        assert!(store.read_snapshot::<f64>(Stream::Games, "missing").is_none());
    }
}
