//! Data directory layout:
//!
//! ```text
//! routes/<id>.json       canonical route JSON
//! weather/<id>.jsonl     canonical weather JSONL
//! sessions/<id>.jsonl    append-only event log, one record per line
//! index.json             session index
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EventRecord;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pub sessions: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub session_id: String,
    pub route_id: String,
    pub weather_id: String,
    /// Wall-clock creation time, RFC 3339.
    pub created_at: String,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: &Path) -> io::Result<Self> {
        for sub in ["routes", "weather", "sessions"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Store { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn route_path(&self, id: &str) -> PathBuf {
        self.root.join("routes").join(format!("{id}.json"))
    }

    fn weather_path(&self, id: &str) -> PathBuf {
        self.root.join("weather").join(format!("{id}.jsonl"))
    }

    fn session_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.jsonl"))
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.json")
    }

    pub fn put_route(&self, id: &str, text: &str) -> io::Result<()> {
        write_atomic(&self.route_path(id), text.as_bytes())
    }

    pub fn put_weather(&self, id: &str, text: &str) -> io::Result<()> {
        write_atomic(&self.weather_path(id), text.as_bytes())
    }

    pub fn route_text(&self, id: &str) -> io::Result<String> {
        fs::read_to_string(self.route_path(id))
    }

    pub fn weather_text(&self, id: &str) -> io::Result<String> {
        fs::read_to_string(self.weather_path(id))
    }

    pub fn append_event(&self, session_id: &str, event: &EventRecord) -> io::Result<()> {
        let mut line = serde_json::to_string(event).map_err(io::Error::other)?;
        line.push('\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.session_path(session_id))?;
        f.write_all(line.as_bytes())?;
        f.sync_data()
    }

    pub fn read_events(&self, session_id: &str) -> io::Result<Vec<EventRecord>> {
        let f = File::open(self.session_path(session_id))?;
        let mut out = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ev = serde_json::from_str(&line).map_err(|e| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("session {session_id} line {}: {e}", i + 1),
                )
            })?;
            out.push(ev);
        }
        Ok(out)
    }

    /// Raw event log text, exactly as stored.
    pub fn event_log_text(&self, session_id: &str) -> io::Result<String> {
        fs::read_to_string(self.session_path(session_id))
    }

    pub fn read_index(&self) -> io::Result<Index> {
        match fs::read_to_string(self.index_path()) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Index::default()),
            Err(e) => Err(e),
        }
    }

    pub fn write_index(&self, index: &Index) -> io::Result<()> {
        let text = serde_json::to_string_pretty(index).map_err(io::Error::other)?;
        write_atomic(&self.index_path(), text.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_data()?;
    }
    fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trips_and_defaults_when_missing() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.read_index().unwrap(), Index::default());
        let index = Index {
            sessions: vec![IndexEntry {
                session_id: "s1".into(),
                route_id: "r".into(),
                weather_id: "w".into(),
                created_at: "2024-01-01T00:00:00+00:00".into(),
            }],
        };
        store.write_index(&index).unwrap();
        assert_eq!(store.read_index().unwrap(), index);
        assert!(!dir.path().join("index.tmp").exists());
    }

    #[test]
    fn resources_are_stored_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.put_route("r-1", "[]\n").unwrap();
        store.put_weather("w-1", "{}\n").unwrap();
        assert_eq!(store.route_text("r-1").unwrap(), "[]\n");
        assert_eq!(store.weather_text("w-1").unwrap(), "{}\n");
        assert!(store.route_text("r-2").is_err());
    }
}
