//! In-memory session store with TTL eviction and JSON snapshots.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use titl_core::{SearchEngine, Session};

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug)]
pub struct SessionSlot {
    pub session: Session,
    /// Seconds since the Unix epoch of the last request touching the session.
    pub last_active: u64,
}

pub type SharedSlot = Arc<Mutex<SessionSlot>>;

/// Sessions keyed by id. Each session has its own lock, so requests on one
/// session are serialized while different sessions proceed independently.
#[derive(Debug)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, SharedSlot>>,
    ttl: Duration,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    sentence_count: usize,
    sessions: Vec<StoredSession>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StoredSession {
    session: Session,
    last_active: u64,
}

/// Outcome of loading a snapshot at startup.
#[derive(Debug, PartialEq, Eq)]
pub enum RestoreOutcome {
    Missing,
    Restored(usize),
    /// The snapshot was unusable; the store stays empty.
    Rejected(String),
}

pub(crate) fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        SessionStore {
            sessions: RwLock::new(HashMap::new()),
            ttl,
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, session: Session) -> SharedSlot {
        let id = session.session_id.clone();
        let slot = Arc::new(Mutex::new(SessionSlot {
            session,
            last_active: unix_now(),
        }));
        self.sessions.write().insert(id, Arc::clone(&slot));
        slot
    }

    /// Looks up a live session and refreshes its activity time.
    pub fn get(&self, id: &str) -> Option<SharedSlot> {
        let slot = self.sessions.read().get(id).cloned()?;
        let now = unix_now();
        {
            let mut guard = slot.lock();
            if self.expired(guard.last_active, now) {
                drop(guard);
                self.sessions.write().remove(id);
                return None;
            }
            guard.last_active = now;
        }
        Some(slot)
    }

    fn expired(&self, last_active: u64, now: u64) -> bool {
        now.saturating_sub(last_active) > self.ttl.as_secs()
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn evict_expired(&self, now: u64) -> usize {
        let mut sessions = self.sessions.write();
        let before = sessions.len();
        sessions.retain(|_, slot| !self.expired(slot.lock().last_active, now));
        before - sessions.len()
    }

    pub fn snapshot_json(&self, sentence_count: usize) -> String {
        let sessions = self.sessions.read();
        let mut stored: Vec<StoredSession> = sessions
            .values()
            .map(|slot| {
                let slot = slot.lock();
                StoredSession {
                    session: slot.session.clone(),
                    last_active: slot.last_active,
                }
            })
            .collect();
        stored.sort_by(|a, b| a.session.session_id.cmp(&b.session.session_id));
        let snapshot = Snapshot {
            version: SNAPSHOT_VERSION,
            sentence_count,
            sessions: stored,
        };
        serde_json::to_string_pretty(&snapshot).expect("session serialization cannot fail")
    }

    pub fn write_snapshot(&self, path: &Path, sentence_count: usize) -> std::io::Result<()> {
        let json = self.snapshot_json(sentence_count);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, json)?;
        std::fs::rename(&tmp, path)
    }

    /// Replaces the store contents with the sessions in `path`. Snapshots
    /// taken against a different index, or that fail to parse, leave the
    /// store empty.
    pub fn restore(&self, path: &Path, engine: &SearchEngine) -> RestoreOutcome {
        let text = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return RestoreOutcome::Missing,
            Err(e) => return RestoreOutcome::Rejected(format!("cannot read snapshot: {e}")),
        };
        match self.restore_json(&text, engine) {
            Ok(n) => RestoreOutcome::Restored(n),
            Err(reason) => RestoreOutcome::Rejected(reason),
        }
    }

    pub fn restore_json(&self, text: &str, engine: &SearchEngine) -> Result<usize, String> {
        let snapshot: Snapshot =
            serde_json::from_str(text).map_err(|e| format!("corrupt snapshot: {e}"))?;
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(format!("unsupported snapshot version {}", snapshot.version));
        }
        let index = engine.index();
        if snapshot.sentence_count != index.len() {
            return Err(format!(
                "snapshot was taken against an index of {} sentences, loaded index has {}",
                snapshot.sentence_count,
                index.len()
            ));
        }
        for stored in &snapshot.sessions {
            let s = &stored.session;
            s.check_invariants()
                .map_err(|e| format!("session {}: {e}", s.session_id))?;
            if let Some(id) = s.shown.iter().find(|&&id| index.get(id).is_none()) {
                return Err(format!("session {} references unknown sentence {id}", s.session_id));
            }
            if let Some(v) = &s.query_vector {
                if v.len() != index.dim() {
                    return Err(format!("session {} has a query vector of the wrong dimension", s.session_id));
                }
            }
        }
        let now = unix_now();
        let mut map = HashMap::new();
        for stored in snapshot.sessions {
            if self.expired(stored.last_active, now) {
                continue;
            }
            map.insert(
                stored.session.session_id.clone(),
                Arc::new(Mutex::new(SessionSlot {
                    session: stored.session,
                    last_active: stored.last_active,
                })),
            );
        }
        let n = map.len();
        *self.sessions.write() = map;
        Ok(n)
    }
}
