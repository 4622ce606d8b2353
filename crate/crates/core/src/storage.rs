//! File-backed document store.
//!
//! Every JSON document carries `schema_version`; loading a document with a
//! different version is an error, never a migration. Writes go to a sibling
//! temp file which is then renamed over the target.

use crate::profile::{ProfileError, StudentProfile};
use crate::retrieval::{KbError, PersonalKnowledgeBase};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

pub const DOCUMENT_SCHEMA_VERSION: u32 = 1;

const SUBDIRS: &[&str] = &[
    "profiles", "modules", "kbs", "retrieval", "adaptations", "served", "eval", "telemetry", "jobs",
];

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to `path` through a temp file in the same directory.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?
        .to_string_lossy();
    let tmp = dir.join(format!(
        ".{name}.tmp-{}-{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("invalid identifier {0:?}")]
    InvalidId(String),
    #[error("{kind} {id:?} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("{path}: schema version {found} is not supported (expected {expected})")]
    SchemaVersion { path: String, found: u64, expected: u32 },
    #[error("{path}: corrupt document: {message}")]
    Corrupt { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Identifiers become path components, so they are restricted to
/// `[A-Za-z0-9_.-]`, at most 128 characters, not starting with a dot.
pub fn validate_id(id: &str) -> Result<(), StorageError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'));
    if ok {
        Ok(())
    } else {
        Err(StorageError::InvalidId(id.to_string()))
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    schema_version: u32,
    kind: &'a str,
    data: &'a T,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeIn<T> {
    #[allow(dead_code)]
    schema_version: u32,
    kind: String,
    data: T,
}

/// Pretty JSON of a versioned `{schema_version, kind, data}` envelope.
pub fn encode_document<T: Serialize>(kind: &str, data: &T) -> String {
    let env = EnvelopeOut {
        schema_version: DOCUMENT_SCHEMA_VERSION,
        kind,
        data,
    };
    serde_json::to_string_pretty(&env).expect("document serializes") + "\n"
}

pub fn decode_document<T: DeserializeOwned>(path: &str, kind: &str, raw: &str) -> Result<T, StorageError> {
    let corrupt = |message: String| StorageError::Corrupt {
        path: path.to_string(),
        message,
    };
    let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| corrupt(e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt("missing schema_version".into()))?;
    if found != u64::from(DOCUMENT_SCHEMA_VERSION) {
        return Err(StorageError::SchemaVersion {
            path: path.to_string(),
            found,
            expected: DOCUMENT_SCHEMA_VERSION,
        });
    }
    let env: EnvelopeIn<T> = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    if env.kind != kind {
        return Err(corrupt(format!("expected a {kind} document, found {}", env.kind)));
    }
    Ok(env.data)
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StorageError> {
        let root = root.into();
        for sub in SUBDIRS {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, parts: &[&str], file: &str) -> Result<PathBuf, StorageError> {
        let mut p = self.root.clone();
        for part in parts {
            if !SUBDIRS.contains(part) {
                validate_id(part)?;
            }
            p.push(part);
        }
        p.push(file);
        Ok(p)
    }

    fn read(&self, path: &Path, kind: &'static str, id: &str) -> Result<String, StorageError> {
        match fs::read_to_string(path) {
            Ok(s) => Ok(s),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StorageError::NotFound {
                kind,
                id: id.to_string(),
            }),
            Err(e) => Err(e.into()),
        }
    }

    /// Saves `data` as `<parts>/<id>.json` in a versioned envelope.
    pub fn put<T: Serialize>(&self, parts: &[&str], id: &str, kind: &str, data: &T) -> Result<PathBuf, StorageError> {
        validate_id(id)?;
        let path = self.path(parts, &format!("{id}.json"))?;
        atomic_write(&path, encode_document(kind, data).as_bytes())?;
        Ok(path)
    }

    pub fn get<T: DeserializeOwned>(&self, parts: &[&str], id: &str, kind: &'static str) -> Result<T, StorageError> {
        validate_id(id)?;
        let path = self.path(parts, &format!("{id}.json"))?;
        let raw = self.read(&path, kind, id)?;
        decode_document(&path.display().to_string(), kind, &raw)
    }

    pub fn exists(&self, parts: &[&str], id: &str) -> bool {
        validate_id(id).is_ok()
            && self
                .path(parts, &format!("{id}.json"))
                .map(|p| p.is_file())
                .unwrap_or(false)
    }

    /// Ids of the `.json` documents directly under `parts`, sorted.
    pub fn list(&self, parts: &[&str]) -> Result<Vec<String>, StorageError> {
        let dir = self.path(parts, "")?;
        let mut ids = Vec::new();
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(ids),
            Err(e) => return Err(e.into()),
        };
        for entry in entries {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_suffix(".json") {
                if validate_id(id).is_ok() {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Sub-directory names under `parts` that are valid ids, sorted.
    pub fn list_dirs(&self, parts: &[&str]) -> Result<Vec<String>, StorageError> {
        let dir = self.path(parts, "")?;
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut ids = Vec::new();
        for entry in entries {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if entry.file_type()?.is_dir() && validate_id(&name).is_ok() {
                ids.push(name);
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn save_profile(&self, profile: &StudentProfile) -> Result<PathBuf, StorageError> {
        validate_id(&profile.student_id)?;
        let path = self.path(&["profiles"], &format!("{}.json", profile.student_id))?;
        profile.validate().map_err(|e| StorageError::Invalid {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        atomic_write(&path, profile.to_json().as_bytes())?;
        Ok(path)
    }

    pub fn load_profile(&self, id: &str) -> Result<StudentProfile, StorageError> {
        validate_id(id)?;
        let path = self.path(&["profiles"], &format!("{id}.json"))?;
        let raw = self.read(&path, "profile", id)?;
        let display = path.display().to_string();
        StudentProfile::from_json(&raw).map_err(|e| match e {
            ProfileError::SchemaVersion { found, expected } => StorageError::SchemaVersion {
                path: display,
                found: u64::from(found),
                expected,
            },
            ProfileError::Malformed(message) => StorageError::Corrupt { path: display, message },
            ProfileError::Invalid(message) => StorageError::Invalid { path: display, message },
        })
    }

    pub fn kb_dir(&self, profile_id: &str, module_id: &str) -> Result<PathBuf, StorageError> {
        validate_id(profile_id)?;
        validate_id(module_id)?;
        Ok(self.root.join("kbs").join(profile_id).join(module_id))
    }

    pub fn save_kb(&self, kb: &PersonalKnowledgeBase) -> Result<PathBuf, StorageError> {
        let dir = self.kb_dir(&kb.meta().profile_id, &kb.meta().segment_set_id)?;
        kb.save(&dir)?;
        Ok(dir)
    }

    pub fn load_kb(&self, profile_id: &str, module_id: &str) -> Result<PersonalKnowledgeBase, StorageError> {
        let dir = self.kb_dir(profile_id, module_id)?;
        if !dir.join("meta.json").is_file() {
            return Err(StorageError::NotFound {
                kind: "knowledge base",
                id: format!("{profile_id}/{module_id}"),
            });
        }
        Ok(PersonalKnowledgeBase::load(&dir)?)
    }

    /// Appends one JSON line to `telemetry/<id>.jsonl`.
    pub fn append_line<T: Serialize>(&self, parts: &[&str], id: &str, record: &T) -> Result<(), StorageError> {
        validate_id(id)?;
        let path = self.path(parts, &format!("{id}.jsonl"))?;
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&path)?;
        f.write_all(line.as_bytes())?;
        Ok(())
    }

    pub fn read_lines<T: DeserializeOwned>(&self, parts: &[&str], id: &str) -> Result<Vec<T>, StorageError> {
        validate_id(id)?;
        let path = self.path(parts, &format!("{id}.jsonl"))?;
        let raw = match fs::read_to_string(&path) {
            Ok(r) => r,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        raw.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| StorageError::Corrupt {
                    path: path.display().to_string(),
                    message: format!("line {}: {e}", i + 1),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_restricted() {
        assert!(validate_id("student_001").is_ok());
        assert!(validate_id("tagi.m1-2").is_ok());
        for bad in ["", "..", ".hidden", "a/b", "a b", "é"] {
            assert!(validate_id(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn envelope_round_trip_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let path = store.put(&["eval"], "x", "numbers", &vec![1, 2, 3]).unwrap();
        let back: Vec<i32> = store.get(&["eval"], "x", "numbers").unwrap();
        assert_eq!(back, vec![1, 2, 3]);
        let raw = fs::read_to_string(&path).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 9");
        fs::write(&path, raw).unwrap();
        assert!(matches!(
            store.get::<Vec<i32>>(&["eval"], "x", "numbers"),
            Err(StorageError::SchemaVersion { found: 9, .. })
        ));
        assert!(matches!(
            store.get::<Vec<i32>>(&["eval"], "missing", "numbers"),
            Err(StorageError::NotFound { .. })
        ));
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let p = crate::profile::table_one_profile();
        let path = store.save_profile(&p).unwrap();
        let first = fs::read(&path).unwrap();
        let back = store.load_profile(&p.student_id).unwrap();
        assert_eq!(back, p);
        store.save_profile(&back).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }

    #[test]
    fn truncated_profile_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let p = crate::profile::table_one_profile();
        let path = store.save_profile(&p).unwrap();
        let raw = fs::read(&path).unwrap();
        fs::write(&path, &raw[..raw.len() / 2]).unwrap();
        assert!(matches!(store.load_profile(&p.student_id), Err(StorageError::Corrupt { .. })));
    }
}
