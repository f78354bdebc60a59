//! On-disk session log: one append-only JSON-lines file per session
//! (`<id>.jsonl`) plus `index.json`, a snapshot summary of every session.
//! Record layout is described in `docs/session-log.md`.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Session, SessionState, Turn};

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session log io: {0}")]
    Io(#[from] std::io::Error),
    #[error("session log {path}: line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no persisted session `{0}`")]
    NotFound(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    Created {
        session_id: String,
        persona_id: String,
        prompt_hash: String,
        created_at_ms: u64,
    },
    State {
        state: SessionState,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        job_id: Option<String>,
    },
    Turn {
        turn: Turn,
    },
    Closed,
}

#[derive(Serialize, Deserialize)]
struct Line {
    v: u32,
    #[serde(flatten)]
    record: Record,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub persona_id: String,
    pub state: SessionState,
    pub turn_count: usize,
    pub created_at_ms: u64,
    pub prompt_hash: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Index {
    version: u32,
    sessions: BTreeMap<String, IndexEntry>,
}

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    index: Mutex<Index>,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let path = dir.join("index.json");
        let index = if path.exists() {
            let bytes = fs::read(&path)?;
            serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?
        } else {
            Index {
                version: LOG_VERSION,
                sessions: BTreeMap::new(),
            }
        };
        Ok(Self {
            dir,
            index: Mutex::new(index),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn log_path(&self, session_id: &str) -> PathBuf {
        self.dir.join(format!("{session_id}.jsonl"))
    }

    /// Appends a record and refreshes the index entry from `snapshot`.
    pub fn append(&self, snapshot: &Session, record: Record) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(&Line {
            v: LOG_VERSION,
            record,
        })
        .expect("record serializes");
        line.push(b'\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.log_path(&snapshot.session_id))?;
        f.write_all(&line)?;
        f.sync_data()?;
        self.update_index(snapshot)
    }

    fn update_index(&self, s: &Session) -> Result<(), StoreError> {
        let mut index = self.index.lock().expect("session index lock");
        index.sessions.insert(
            s.session_id.clone(),
            IndexEntry {
                persona_id: s.persona_id.clone(),
                state: s.state,
                turn_count: s.turns.len(),
                created_at_ms: s.created_at_ms,
                prompt_hash: s.prompt_hash.clone(),
            },
        );
        self.write_index(&index)
    }

    fn write_index(&self, index: &Index) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(index).expect("index serializes");
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&bytes)?;
        tmp.as_file().sync_data()?;
        tmp.persist(self.dir.join("index.json"))
            .map_err(|e| StoreError::Io(e.error))?;
        Ok(())
    }

    pub fn index(&self) -> BTreeMap<String, IndexEntry> {
        self.index.lock().expect("session index lock").sessions.clone()
    }

    /// Rebuilds a session by replaying its log. A torn final line (crash
    /// mid-append) is ignored; damage anywhere else is an error.
    pub fn load(&self, session_id: &str) -> Result<Session, StoreError> {
        let path = self.log_path(session_id);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(session_id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>()?;
        let corrupt = |line: usize, message: String| StoreError::Corrupt {
            path: path.clone(),
            line,
            message,
        };
        let mut session: Option<Session> = None;
        for (i, text) in lines.iter().enumerate() {
            if text.trim().is_empty() {
                continue;
            }
            let parsed: Line = match serde_json::from_str(text) {
                Ok(l) => l,
                Err(_) if i + 1 == lines.len() => break,
                Err(e) => return Err(corrupt(i + 1, e.to_string())),
            };
            if parsed.v != LOG_VERSION {
                return Err(corrupt(i + 1, format!("unsupported version {}", parsed.v)));
            }
            match (parsed.record, session.as_mut()) {
                (
                    Record::Created {
                        session_id,
                        persona_id,
                        prompt_hash,
                        created_at_ms,
                    },
                    None,
                ) => {
                    session = Some(Session {
                        session_id,
                        persona_id,
                        state: SessionState::Idle,
                        turns: Vec::new(),
                        created_at_ms,
                        prompt_hash,
                    })
                }
                (Record::Created { .. }, Some(_)) => {
                    return Err(corrupt(i + 1, "second `created` record".into()))
                }
                (_, None) => return Err(corrupt(i + 1, "record before `created`".into())),
                (Record::State { state, .. }, Some(s)) => s.state = state,
                (Record::Turn { turn }, Some(s)) => {
                    if turn.index as usize != s.turns.len() {
                        return Err(corrupt(i + 1, format!("turn index {} out of sequence", turn.index)));
                    }
                    s.turns.push(turn)
                }
                (Record::Closed, Some(s)) => s.state = SessionState::Closed,
            }
        }
        session.ok_or_else(|| corrupt(1, "empty log".into()))
    }

    /// Deletes logs of closed sessions created before `cutoff_ms`. Nothing
    /// calls this unless a retention period is configured.
    pub fn prune_closed_before(&self, cutoff_ms: u64) -> Result<usize, StoreError> {
        let mut index = self.index.lock().expect("session index lock");
        let doomed: Vec<String> = index
            .sessions
            .iter()
            .filter(|(_, e)| e.state == SessionState::Closed && e.created_at_ms < cutoff_ms)
            .map(|(id, _)| id.clone())
            .collect();
        for id in &doomed {
            match fs::remove_file(self.log_path(id)) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(e.into()),
            }
            index.sessions.remove(id);
        }
        self.write_index(&index)?;
        Ok(doomed.len())
    }
}
