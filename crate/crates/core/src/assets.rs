//! Content-addressed registry for base videos, voice references and
//! rendered clips.
//!
//! ## Layout
//!
//! ```text
//! <root>/
//!   base_video/index.json
//!   base_video/<aa>/<sha256 of file>
//!   voice/index.json
//!   voice/<aa>/<sha256 of descriptor>
//!   clip/index.json
//!   clip/<aa>/<clip_id>
//! ```
//!
//! `<aa>` is the first two hex digits of the file name. Base videos and
//! voices are filed under the digest of their bytes and indexed by their
//! declared id; clips are filed and indexed under their manifest digest.
//! Every file and every index is published by write-to-temp then rename, so
//! a crash leaves either no entry or a complete one.
//!
//! Every read re-hashes the file against the index checksum.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::sha256_hex;
use crate::persona::is_valid_slug;
use crate::providers::{ClipBlob, ClipManifest, VoiceParams, OFFLINE_CONTAINER};

pub const INDEX_VERSION: u32 = 1;
pub const DEFAULT_CLIP_BUDGET_BYTES: u64 = 2 * 1024 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetKind {
    BaseVideo,
    Voice,
    Clip,
}

impl AssetKind {
    pub fn dir_name(self) -> &'static str {
        match self {
            AssetKind::BaseVideo => "base_video",
            AssetKind::Voice => "voice",
            AssetKind::Clip => "clip",
        }
    }
}

impl fmt::Display for AssetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

impl std::str::FromStr for AssetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base_video" | "base-video" | "base" => Ok(AssetKind::BaseVideo),
            "voice" => Ok(AssetKind::Voice),
            "clip" => Ok(AssetKind::Clip),
            other => Err(format!("unknown asset kind `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("{kind} `{id}` is already registered with different content")]
    DuplicateIdMismatch { kind: AssetKind, id: String },
    #[error("unknown {kind} `{id}`")]
    UnknownAsset { kind: AssetKind, id: String },
    #[error("{kind} `{id}` failed checksum verification")]
    ChecksumMismatch { kind: AssetKind, id: String },
    #[error("clip manifest mismatch: {0}")]
    ManifestMismatch(String),
    #[error("invalid metadata: {0}")]
    InvalidMetadata(String),
    #[error("index error in {path}: {message}")]
    Index { path: PathBuf, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A pre-rendered video of the avatar idling, used as the lip-sync template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseVideo {
    pub base_video_id: String,
    pub checksum: String,
    pub duration_ms: u64,
    /// Declared by whoever registers the video; not computed.
    pub loopable: bool,
    pub container: String,
    pub size: u64,
}

/// Handle to a cloned voice held by the synthesis provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiceModelRef {
    pub voice_id: String,
    pub handle: String,
    pub defaults: VoiceParams,
}

impl VoiceModelRef {
    fn descriptor_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("voice ref serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VoiceEntry {
    #[serde(flatten)]
    voice: VoiceModelRef,
    checksum: String,
}

/// What a cached clip answers: this persona saying exactly this text with
/// exactly these voice settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub persona_id: String,
    pub reply_sha256: String,
    pub voice: VoiceParams,
}

impl CacheKey {
    pub fn new(persona_id: &str, reply_text: &str, voice: VoiceParams) -> Self {
        Self {
            persona_id: persona_id.to_string(),
            reply_sha256: sha256_hex(reply_text.as_bytes()),
            voice,
        }
    }

    pub fn as_key(&self) -> String {
        format!(
            "{}:{}:{}",
            self.persona_id,
            self.reply_sha256,
            self.voice.key_fragment()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub manifest: ClipManifest,
    pub container: String,
    pub checksum: String,
    pub size: u64,
    pub created_at_ms: u64,
    pub cache_keys: Vec<CacheKey>,
    #[serde(default)]
    pub last_access: u64,
}

impl ClipRecord {
    pub fn content_type(&self) -> &'static str {
        crate::providers::content_type_for(&self.container)
    }
}

/// Metadata for registering a file from disk (the `assets register` path).
#[derive(Debug, Clone, PartialEq)]
pub enum AssetMetadata {
    BaseVideo {
        id: Option<String>,
        duration_ms: u64,
        loopable: bool,
        container: Option<String>,
    },
    /// The file is a JSON [`VoiceModelRef`] descriptor.
    Voice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsckProblem {
    pub kind: AssetKind,
    pub id: String,
    pub problem: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsckReport {
    pub checked: usize,
    pub problems: Vec<FsckProblem>,
}

impl FsckReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Index<E> {
    version: u32,
    entries: BTreeMap<String, E>,
    /// Clip index only: cache key → clip id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    cache: BTreeMap<String, String>,
}

impl<E> Default for Index<E> {
    fn default() -> Self {
        Self {
            version: INDEX_VERSION,
            entries: BTreeMap::new(),
            cache: BTreeMap::new(),
        }
    }
}

struct Shelf<E> {
    kind: AssetKind,
    dir: PathBuf,
    index: RwLock<Index<E>>,
    writer: Mutex<()>,
}

impl<E: Serialize + DeserializeOwned + Clone> Shelf<E> {
    fn open(root: &Path, kind: AssetKind) -> Result<Self, AssetError> {
        let dir = root.join(kind.dir_name());
        std::fs::create_dir_all(&dir)?;
        let index_path = dir.join("index.json");
        let index = match std::fs::read(&index_path) {
            Ok(bytes) => {
                let index: Index<E> =
                    serde_json::from_slice(&bytes).map_err(|e| AssetError::Index {
                        path: index_path.clone(),
                        message: e.to_string(),
                    })?;
                if index.version != INDEX_VERSION {
                    return Err(AssetError::Index {
                        path: index_path,
                        message: format!("unsupported index version {}", index.version),
                    });
                }
                index
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Index::default(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            kind,
            dir,
            index: RwLock::new(index),
            writer: Mutex::new(()),
        })
    }

    fn file_path(&self, name: &str) -> PathBuf {
        self.dir.join(&name[..2.min(name.len())]).join(name)
    }

    fn get(&self, id: &str) -> Option<E> {
        self.index.read().expect("index lock").entries.get(id).cloned()
    }

    fn unknown(&self, id: &str) -> AssetError {
        AssetError::UnknownAsset {
            kind: self.kind,
            id: id.to_string(),
        }
    }

    /// Publishes `bytes` under `name` unless an identical file is already there.
    fn write_file(&self, name: &str, bytes: &[u8]) -> Result<(), AssetError> {
        let path = self.file_path(name);
        if let Ok(existing) = std::fs::read(&path) {
            if existing == bytes {
                return Ok(());
            }
        }
        atomic_write(&path, bytes)
    }

    /// Call with the writer lock held.
    fn persist_index(&self) -> Result<(), AssetError> {
        let bytes = {
            let index = self.index.read().expect("index lock");
            serde_json::to_vec_pretty(&*index).expect("index serializes")
        };
        atomic_write(&self.dir.join("index.json"), &bytes)
    }

    fn read_verified(&self, id: &str, name: &str, checksum: &str) -> Result<Vec<u8>, AssetError> {
        let bytes = std::fs::read(self.file_path(name)).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                AssetError::ChecksumMismatch {
                    kind: self.kind,
                    id: id.to_string(),
                }
            } else {
                e.into()
            }
        })?;
        if sha256_hex(&bytes) != checksum {
            return Err(AssetError::ChecksumMismatch {
                kind: self.kind,
                id: id.to_string(),
            });
        }
        Ok(bytes)
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), AssetError> {
    let parent = path.parent().expect("store paths have parents");
    std::fs::create_dir_all(parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_data()?;
    tmp.persist(path).map_err(|e| AssetError::Io(e.error))?;
    Ok(())
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub struct AssetStore {
    root: PathBuf,
    bases: Shelf<BaseVideo>,
    voices: Shelf<VoiceEntry>,
    clips: Shelf<ClipRecord>,
    clip_budget_bytes: u64,
    access_seq: AtomicU64,
}

impl fmt::Debug for AssetStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AssetStore").field("root", &self.root).finish()
    }
}

impl AssetStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, AssetError> {
        Self::open_with_budget(root, DEFAULT_CLIP_BUDGET_BYTES)
    }

    pub fn open_with_budget(root: impl Into<PathBuf>, clip_budget_bytes: u64) -> Result<Self, AssetError> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        let clips = Shelf::<ClipRecord>::open(&root, AssetKind::Clip)?;
        let seq = clips
            .index
            .read()
            .expect("index lock")
            .entries
            .values()
            .map(|c| c.last_access)
            .max()
            .unwrap_or(0);
        Ok(Self {
            bases: Shelf::open(&root, AssetKind::BaseVideo)?,
            voices: Shelf::open(&root, AssetKind::Voice)?,
            clips,
            root,
            clip_budget_bytes,
            access_seq: AtomicU64::new(seq),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Registers a base video. Without a declared id the content digest is
    /// the id. Re-registering identical bytes under the same id is a no-op.
    pub fn register_base_video(
        &self,
        declared_id: Option<&str>,
        bytes: &[u8],
        duration_ms: u64,
        loopable: bool,
        container: &str,
    ) -> Result<String, AssetError> {
        if bytes.is_empty() {
            return Err(AssetError::CorruptFile("base video is empty".into()));
        }
        if duration_ms == 0 {
            return Err(AssetError::InvalidMetadata("duration_ms must be positive".into()));
        }
        let checksum = sha256_hex(bytes);
        let id = match declared_id {
            Some(id) if !is_valid_slug(id) => {
                return Err(AssetError::InvalidMetadata(format!(
                    "base video id `{id}` must match [a-z0-9-]{{1,64}}"
                )))
            }
            Some(id) => id.to_string(),
            None => checksum.clone(),
        };
        let _w = self.bases.writer.lock().expect("writer lock");
        if let Some(existing) = self.bases.get(&id) {
            if existing.checksum == checksum {
                return Ok(id);
            }
            return Err(AssetError::DuplicateIdMismatch {
                kind: AssetKind::BaseVideo,
                id,
            });
        }
        self.bases.write_file(&checksum, bytes)?;
        let entry = BaseVideo {
            base_video_id: id.clone(),
            checksum,
            duration_ms,
            loopable,
            container: container.to_string(),
            size: bytes.len() as u64,
        };
        self.bases
            .index
            .write()
            .expect("index lock")
            .entries
            .insert(id.clone(), entry);
        self.bases.persist_index()?;
        Ok(id)
    }

    pub fn register_voice(&self, voice: &VoiceModelRef) -> Result<String, AssetError> {
        voice.defaults.validate().map_err(AssetError::InvalidMetadata)?;
        if !is_valid_slug(&voice.voice_id) {
            return Err(AssetError::InvalidMetadata(format!(
                "voice id `{}` must match [a-z0-9-]{{1,64}}",
                voice.voice_id
            )));
        }
        if voice.handle.trim().is_empty() {
            return Err(AssetError::InvalidMetadata("voice handle must not be empty".into()));
        }
        let bytes = voice.descriptor_bytes();
        let checksum = sha256_hex(&bytes);
        let id = voice.voice_id.clone();
        let _w = self.voices.writer.lock().expect("writer lock");
        if let Some(existing) = self.voices.get(&id) {
            if existing.checksum == checksum {
                return Ok(id);
            }
            return Err(AssetError::DuplicateIdMismatch {
                kind: AssetKind::Voice,
                id,
            });
        }
        self.voices.write_file(&checksum, &bytes)?;
        self.voices.index.write().expect("index lock").entries.insert(
            id.clone(),
            VoiceEntry {
                voice: voice.clone(),
                checksum,
            },
        );
        self.voices.persist_index()?;
        Ok(id)
    }

    /// Registers a file from disk.
    pub fn register_asset(&self, kind: AssetKind, file: &Path, metadata: AssetMetadata) -> Result<String, AssetError> {
        let bytes = std::fs::read(file)?;
        match (kind, metadata) {
            (
                AssetKind::BaseVideo,
                AssetMetadata::BaseVideo {
                    id,
                    duration_ms,
                    loopable,
                    container,
                },
            ) => {
                let container = container.unwrap_or_else(|| {
                    file.extension()
                        .and_then(|e| e.to_str())
                        .unwrap_or("bin")
                        .to_ascii_lowercase()
                });
                self.register_base_video(id.as_deref(), &bytes, duration_ms, loopable, &container)
            }
            (AssetKind::Voice, AssetMetadata::Voice) => {
                let voice: VoiceModelRef = serde_json::from_slice(&bytes)
                    .map_err(|e| AssetError::CorruptFile(format!("voice descriptor: {e}")))?;
                self.register_voice(&voice)
            }
            (AssetKind::Clip, _) => Err(AssetError::InvalidMetadata(
                "clips are produced by the pipeline, not registered".into(),
            )),
            (kind, _) => Err(AssetError::InvalidMetadata(format!(
                "metadata does not match kind {kind}"
            ))),
        }
    }

    pub fn base_video(&self, id: &str) -> Result<BaseVideo, AssetError> {
        self.bases.get(id).ok_or_else(|| self.bases.unknown(id))
    }

    pub fn voice(&self, id: &str) -> Result<VoiceModelRef, AssetError> {
        self.voices
            .get(id)
            .map(|e| e.voice)
            .ok_or_else(|| self.voices.unknown(id))
    }

    /// Base video metadata plus checksum-verified bytes.
    pub fn read_base_video(&self, id: &str) -> Result<(BaseVideo, Vec<u8>), AssetError> {
        let entry = self.base_video(id)?;
        let bytes = self.bases.read_verified(id, &entry.checksum, &entry.checksum)?;
        Ok((entry, bytes))
    }

    pub fn clip(&self, clip_id: &str) -> Result<ClipRecord, AssetError> {
        self.clips.get(clip_id).ok_or_else(|| self.clips.unknown(clip_id))
    }

    /// Clip record plus checksum-verified bytes.
    pub fn read_clip(&self, clip_id: &str) -> Result<(ClipRecord, Vec<u8>), AssetError> {
        let record = self.clip(clip_id)?;
        let bytes = self.clips.read_verified(clip_id, clip_id, &record.checksum)?;
        self.touch(clip_id);
        Ok((record, bytes))
    }

    /// Generic lookup by kind: the record as JSON plus verified bytes.
    pub fn get_asset(&self, kind: AssetKind, id: &str) -> Result<(serde_json::Value, Vec<u8>), AssetError> {
        match kind {
            AssetKind::BaseVideo => {
                let (e, b) = self.read_base_video(id)?;
                Ok((serde_json::to_value(e).expect("serializes"), b))
            }
            AssetKind::Voice => {
                let e = self.voices.get(id).ok_or_else(|| self.voices.unknown(id))?;
                let b = self.voices.read_verified(id, &e.checksum, &e.checksum)?;
                Ok((serde_json::to_value(e.voice).expect("serializes"), b))
            }
            AssetKind::Clip => {
                let (e, b) = self.read_clip(id)?;
                Ok((serde_json::to_value(e).expect("serializes"), b))
            }
        }
    }

    fn touch(&self, clip_id: &str) {
        let seq = self.access_seq.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(e) = self.clips.index.write().expect("index lock").entries.get_mut(clip_id) {
            e.last_access = seq;
        }
    }

    /// Exact-match cache lookup.
    pub fn lookup_cache(&self, key: &CacheKey) -> Option<String> {
        let id = {
            let index = self.clips.index.read().expect("index lock");
            let id = index.cache.get(&key.as_key())?;
            index.entries.contains_key(id).then(|| id.clone())?
        };
        self.touch(&id);
        Some(id)
    }

    /// Stores a rendered clip and files it under `key`. A clip whose manifest
    /// is already stored is not rewritten; the key is added to it.
    pub fn store_clip(&self, clip: &ClipBlob, key: CacheKey) -> Result<ClipRecord, AssetError> {
        if clip.bytes.is_empty() {
            return Err(AssetError::ManifestMismatch("clip has no bytes".into()));
        }
        if clip.duration_ms != clip.manifest.duration_ms {
            return Err(AssetError::ManifestMismatch(format!(
                "clip lasts {} ms, manifest says {} ms",
                clip.duration_ms, clip.manifest.duration_ms
            )));
        }
        let checksum = sha256_hex(&clip.bytes);
        if clip.container == OFFLINE_CONTAINER && checksum != clip.manifest.audio_sha256 {
            return Err(AssetError::ManifestMismatch(
                "wav clip bytes do not match manifest audio digest".into(),
            ));
        }
        let clip_id = clip.manifest.clip_id();
        let key_str = key.as_key();
        let seq = self.access_seq.fetch_add(1, Ordering::Relaxed) + 1;

        let _w = self.clips.writer.lock().expect("writer lock");
        if self.clips.get(&clip_id).is_none() {
            self.clips.write_file(&clip_id, &clip.bytes)?;
        }
        let record = {
            let mut index = self.clips.index.write().expect("index lock");
            if let Some(previous) = index.cache.insert(key_str.clone(), clip_id.clone()) {
                if previous != clip_id {
                    if let Some(old) = index.entries.get_mut(&previous) {
                        old.cache_keys.retain(|k| k.as_key() != key_str);
                    }
                }
            }
            let record = index
                .entries
                .entry(clip_id.clone())
                .or_insert_with(|| ClipRecord {
                    clip_id: clip_id.clone(),
                    manifest: clip.manifest.clone(),
                    container: clip.container.clone(),
                    checksum,
                    size: clip.bytes.len() as u64,
                    created_at_ms: now_ms(),
                    cache_keys: Vec::new(),
                    last_access: seq,
                });
            record.last_access = seq;
            if !record.cache_keys.iter().any(|k| k.as_key() == key_str) {
                record.cache_keys.push(key);
            }
            record.clone()
        };
        self.evict_over_budget(&clip_id)?;
        self.clips.persist_index()?;
        Ok(record)
    }

    /// Least-recently-used eviction down to the byte budget. `keep` is never
    /// evicted. Call with the clip writer lock held.
    fn evict_over_budget(&self, keep: &str) -> Result<(), AssetError> {
        let victims: Vec<String> = {
            let index = self.clips.index.read().expect("index lock");
            let mut total: u64 = index.entries.values().map(|c| c.size).sum();
            if total <= self.clip_budget_bytes {
                return Ok(());
            }
            let mut by_age: Vec<&ClipRecord> =
                index.entries.values().filter(|c| c.clip_id != keep).collect();
            by_age.sort_by_key(|c| c.last_access);
            let mut out = Vec::new();
            for c in by_age {
                if total <= self.clip_budget_bytes {
                    break;
                }
                total -= c.size;
                out.push(c.clip_id.clone());
            }
            out
        };
        if victims.is_empty() {
            return Ok(());
        }
        {
            let mut index = self.clips.index.write().expect("index lock");
            for id in &victims {
                index.entries.remove(id);
            }
            index.cache.retain(|_, id| !victims.contains(id));
        }
        for id in &victims {
            tracing::debug!(clip_id = %id, "evicting clip");
            match std::fs::remove_file(self.clips.file_path(id)) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }

    pub fn clip_bytes_total(&self) -> u64 {
        self.clips
            .index
            .read()
            .expect("index lock")
            .entries
            .values()
            .map(|c| c.size)
            .sum()
    }

    /// Audits every index row: the file exists and hashes to the recorded
    /// checksum, clip ids re-derive from their manifests, and every cache key
    /// points at a stored clip.
    pub fn fsck(&self) -> FsckReport {
        let mut report = FsckReport::default();
        let mut check = |kind: AssetKind, id: &str, path: PathBuf, checksum: &str| {
            report.checked += 1;
            let problem = match std::fs::read(&path) {
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Some("file missing".to_string()),
                Err(e) => Some(format!("unreadable: {e}")),
                Ok(bytes) if sha256_hex(&bytes) != checksum => Some("checksum mismatch".to_string()),
                Ok(_) => None,
            };
            if let Some(problem) = problem {
                report.problems.push(FsckProblem {
                    kind,
                    id: id.to_string(),
                    problem,
                });
            }
        };
        for (id, e) in self.bases.index.read().expect("index lock").entries.iter() {
            check(AssetKind::BaseVideo, id, self.bases.file_path(&e.checksum), &e.checksum);
        }
        for (id, e) in self.voices.index.read().expect("index lock").entries.iter() {
            check(AssetKind::Voice, id, self.voices.file_path(&e.checksum), &e.checksum);
        }
        let clips = self.clips.index.read().expect("index lock");
        for (id, e) in clips.entries.iter() {
            check(AssetKind::Clip, id, self.clips.file_path(id), &e.checksum);
        }
        for (id, e) in clips.entries.iter() {
            if e.manifest.clip_id() != *id {
                report.problems.push(FsckProblem {
                    kind: AssetKind::Clip,
                    id: id.clone(),
                    problem: "clip id does not match manifest".into(),
                });
            }
        }
        for (key, id) in clips.cache.iter() {
            if !clips.entries.contains_key(id) {
                report.problems.push(FsckProblem {
                    kind: AssetKind::Clip,
                    id: id.clone(),
                    problem: format!("cache key {key} points at a missing clip"),
                });
            }
        }
        report
    }

    /// On-disk path of a stored asset file, for tooling and tests.
    pub fn file_path(&self, kind: AssetKind, id: &str) -> Result<PathBuf, AssetError> {
        match kind {
            AssetKind::BaseVideo => Ok(self.bases.file_path(&self.base_video(id)?.checksum)),
            AssetKind::Voice => {
                let e = self.voices.get(id).ok_or_else(|| self.voices.unknown(id))?;
                Ok(self.voices.file_path(&e.checksum))
            }
            AssetKind::Clip => {
                self.clip(id)?;
                Ok(self.clips.file_path(id))
            }
        }
    }
}
