//! Bundle and session storage, with optional on-disk persistence.
//!
//! Layout under the data directory:
//! `bundles/<id>.zip` and `bundles/<id>.json` (the record), one
//! `sessions/<id>.jsonl` per session (a header line, then the session log),
//! and `expired.txt` listing purged session ids.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use warehouse_core::diagnostic::Diagnostic;
use warehouse_core::session::LogRecord;
use warehouse_core::{Bundle, Session};

use crate::archive::load_bundle;
use crate::samples::samples;

pub const DEFAULT_TTL: Duration = Duration::from_secs(24 * 60 * 60);
pub const DEFAULT_MAX_UPLOAD: usize = 5 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: Option<PathBuf>,
    pub session_ttl: Duration,
    pub max_upload: usize,
    /// Directory of web assets served at `/`; a built-in page otherwise.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: None,
            session_ttl: DEFAULT_TTL,
            max_upload: DEFAULT_MAX_UPLOAD,
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Builtin,
    Uploaded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleRecord {
    pub id: String,
    pub title: String,
    pub modules: usize,
    pub questions: usize,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct StoredBundle {
    pub record: BundleRecord,
    pub bundle: Arc<Bundle>,
}

#[derive(Debug)]
pub struct SessionSlot {
    pub id: String,
    pub bundle_id: String,
    pub session: Session,
    pub created_ms: u64,
    pub last_activity_ms: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SessionHeader {
    session: String,
    bundle: String,
    created_ms: u64,
}

pub enum Lookup {
    Live(Arc<Mutex<SessionSlot>>),
    Expired,
    Missing,
}

pub enum Upload {
    Created(BundleRecord),
    Existing(BundleRecord),
    NotZip(Vec<Diagnostic>),
    Invalid(Vec<Diagnostic>),
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

pub struct Store {
    pub config: ServiceConfig,
    bundles: RwLock<Vec<StoredBundle>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionSlot>>>>,
    expired: RwLock<HashSet<String>>,
}

impl Store {
    /// Built-in samples plus whatever the data directory holds.
    pub fn open(config: ServiceConfig) -> io::Result<Store> {
        let mut bundles: Vec<StoredBundle> = samples()
            .into_iter()
            .map(|s| {
                let bundle = Arc::new(Bundle::from_modules(s.modules).expect("samples are non-empty"));
                StoredBundle {
                    record: BundleRecord {
                        id: s.id.into(),
                        title: s.title.into(),
                        modules: bundle.len(),
                        questions: bundle.question_count(),
                        source: Source::Builtin,
                    },
                    bundle,
                }
            })
            .collect();
        let store = Store {
            config,
            bundles: RwLock::new(Vec::new()),
            sessions: RwLock::new(HashMap::new()),
            expired: RwLock::new(HashSet::new()),
        };
        if let Some(dir) = store.config.data_dir.clone() {
            fs::create_dir_all(dir.join("bundles"))?;
            fs::create_dir_all(dir.join("sessions"))?;
            bundles.extend(load_stored_bundles(&dir.join("bundles"))?);
            *store.bundles.write().unwrap() = bundles;
            store.load_sessions(&dir)?;
        } else {
            *store.bundles.write().unwrap() = bundles;
        }
        Ok(store)
    }

    pub fn bundle_records(&self) -> Vec<BundleRecord> {
        self.bundles.read().unwrap().iter().map(|b| b.record.clone()).collect()
    }

    pub fn bundle(&self, id: &str) -> Option<StoredBundle> {
        self.bundles.read().unwrap().iter().find(|b| b.record.id == id).cloned()
    }

    /// Validates and stores an uploaded archive. Ids are content hashes, so
    /// uploading the same bytes twice yields the same record.
    pub fn upload(&self, bytes: &[u8], title: Option<String>) -> io::Result<Upload> {
        let loaded = match load_bundle(bytes) {
            Ok(l) => l,
            Err(d) if d.iter().any(|d| d.code == warehouse_core::Code::ZipCorrupt) => return Ok(Upload::NotZip(d)),
            Err(d) => return Ok(Upload::Invalid(d)),
        };
        let id = format!("u{}", &hex::encode(Sha256::digest(bytes))[..16]);
        let mut bundles = self.bundles.write().unwrap();
        if let Some(b) = bundles.iter().find(|b| b.record.id == id) {
            return Ok(Upload::Existing(b.record.clone()));
        }
        let bundle = Arc::new(loaded.bundle);
        let title = title
            .filter(|t| !t.trim().is_empty())
            .unwrap_or_else(|| bundle.module(0).map(|m| m.name.clone()).unwrap_or_default());
        let record = BundleRecord {
            id: id.clone(),
            title,
            modules: bundle.len(),
            questions: bundle.question_count(),
            source: Source::Uploaded,
        };
        if let Some(dir) = &self.config.data_dir {
            let dir = dir.join("bundles");
            fs::write(dir.join(format!("{id}.zip")), bytes)?;
            fs::write(dir.join(format!("{id}.json")), serde_json::to_vec(&record)?)?;
        }
        bundles.push(StoredBundle { record: record.clone(), bundle });
        Ok(Upload::Created(record))
    }

    pub fn create_session(&self, bundle_id: &str, seed: u64) -> io::Result<Option<Arc<Mutex<SessionSlot>>>> {
        let Some(stored) = self.bundle(bundle_id) else {
            return Ok(None);
        };
        let session = Session::start(stored.bundle, seed).expect("stored bundles are non-empty");
        let id = format!("{:032x}", rand::random::<u128>());
        let now = now_ms();
        let slot = SessionSlot {
            id: id.clone(),
            bundle_id: bundle_id.into(),
            session,
            created_ms: now,
            last_activity_ms: now,
        };
        if let Some(path) = self.session_path(&id) {
            let mut f = File::create(path)?;
            let header = SessionHeader { session: id.clone(), bundle: bundle_id.into(), created_ms: now };
            serde_json::to_writer(&mut f, &header)?;
            f.write_all(b"\n")?;
            crate::play::write_log(slot.session.log(), &mut f)?;
        }
        let slot = Arc::new(Mutex::new(slot));
        self.sessions.write().unwrap().insert(id, slot.clone());
        Ok(Some(slot))
    }

    pub fn lookup(&self, id: &str) -> Lookup {
        let slot = self.sessions.read().unwrap().get(id).cloned();
        match slot {
            Some(slot) => {
                let idle = now_ms().saturating_sub(slot.lock().unwrap().last_activity_ms);
                if idle > self.config.session_ttl.as_millis() as u64 {
                    self.expire(id);
                    Lookup::Expired
                } else {
                    Lookup::Live(slot)
                }
            }
            None if self.expired.read().unwrap().contains(id) => Lookup::Expired,
            None => Lookup::Missing,
        }
    }

    /// Appends log records the session gained since `from` to its file.
    pub fn persist(&self, slot: &SessionSlot, from: usize) -> io::Result<()> {
        let Some(path) = self.session_path(&slot.id) else {
            return Ok(());
        };
        let mut f = OpenOptions::new().append(true).open(path)?;
        crate::play::write_log(&slot.session.log()[from..], &mut f)
    }

    /// Drops sessions idle for longer than the TTL. Returns how many went.
    pub fn purge_expired(&self) -> usize {
        let limit = self.config.session_ttl.as_millis() as u64;
        let now = now_ms();
        let stale: Vec<String> = self
            .sessions
            .read()
            .unwrap()
            .iter()
            .filter(|(_, s)| now.saturating_sub(s.lock().unwrap().last_activity_ms) > limit)
            .map(|(id, _)| id.clone())
            .collect();
        for id in &stale {
            self.expire(id);
        }
        stale.len()
    }

    fn expire(&self, id: &str) {
        if self.sessions.write().unwrap().remove(id).is_none() {
            return;
        }
        self.expired.write().unwrap().insert(id.to_string());
        if let Some(dir) = &self.config.data_dir {
            let _ = fs::remove_file(dir.join("sessions").join(format!("{id}.jsonl")));
            if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(dir.join("expired.txt")) {
                let _ = writeln!(f, "{id}");
            }
        }
    }

    fn session_path(&self, id: &str) -> Option<PathBuf> {
        self.config.data_dir.as_ref().map(|d| d.join("sessions").join(format!("{id}.jsonl")))
    }

    fn load_sessions(&self, dir: &Path) -> io::Result<()> {
        if let Ok(text) = fs::read_to_string(dir.join("expired.txt")) {
            self.expired.write().unwrap().extend(text.lines().map(str::to_string));
        }
        for entry in fs::read_dir(dir.join("sessions"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let mut lines = BufReader::new(File::open(&path)?).lines();
            let Some(Ok(first)) = lines.next() else { continue };
            let Ok(header) = serde_json::from_str::<SessionHeader>(&first) else { continue };
            let mut log: Vec<LogRecord> = Vec::new();
            for line in lines {
                let line = line?;
                if let Ok(rec) = serde_json::from_str(&line) {
                    log.push(rec);
                }
            }
            let Some(stored) = self.bundle(&header.bundle) else { continue };
            let Ok(session) = Session::replay(stored.bundle, &log) else { continue };
            let modified = fs::metadata(&path)?
                .modified()
                .ok()
                .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
                .map(|d| d.as_millis() as u64)
                .unwrap_or(header.created_ms);
            let slot = SessionSlot {
                id: header.session.clone(),
                bundle_id: header.bundle,
                session,
                created_ms: header.created_ms,
                last_activity_ms: modified.max(header.created_ms),
            };
            self.sessions.write().unwrap().insert(header.session, Arc::new(Mutex::new(slot)));
        }
        Ok(())
    }
}

fn load_stored_bundles(dir: &Path) -> io::Result<Vec<StoredBundle>> {
    let mut out = Vec::new();
    // Upload order is recovered from record file times.
    let mut paths: Vec<(SystemTime, PathBuf)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .map(|p| (fs::metadata(&p).and_then(|m| m.modified()).unwrap_or(UNIX_EPOCH), p))
        .collect();
    paths.sort();
    for (_, meta) in paths {
        let Ok(record) = serde_json::from_slice::<BundleRecord>(&fs::read(&meta)?) else { continue };
        let Ok(bytes) = fs::read(meta.with_extension("zip")) else { continue };
        if let Ok(loaded) = load_bundle(&bytes) {
            out.push(StoredBundle { record, bundle: Arc::new(loaded.bundle) });
        }
    }
    Ok(out)
}
