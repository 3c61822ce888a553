//! Read-only HTTP API over an immutable data snapshot.
//!
//! A [`Snapshot`] is loaded once and never mutated; reloading builds a new
//! one and swaps the shared pointer, so a request sees exactly one version.

use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use atlasburst_core::{
    propagate_states, Anatomy, AnnotationStore, Conflict, GeneSymbol, Palette, StageNumber, StateMap, ValidationReport,
    ViewMode,
};
use lru::LruCache;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fixtures::{ANATOMY_FILE, ANNOTATIONS_FILE};
use crate::format::{docs, parse_anatomy, parse_annotations, parse_palette, FormatError, ParseMode};

mod http;
mod routes;

pub use http::{serve, serve_with_shutdown};
pub use routes::{handle_request, Response};

pub const PALETTE_FILE: &str = "palette.json";
pub const VERSION_HEADER: &str = "X-Snapshot-Version";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub listen: SocketAddr,
    /// Defaults to `palette.json` in the data directory when that exists.
    pub palette: Option<PathBuf>,
    pub mode: ParseMode,
    /// Number of cached expression state maps; 0 disables the cache.
    pub cache_size: usize,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            palette: None,
            mode: ParseMode::Strict,
            cache_size: 256,
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: FormatError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug)]
pub struct Snapshot {
    pub anatomy: Anatomy,
    pub store: AnnotationStore,
    pub palette: Palette,
    /// Non-fatal validation findings of the anatomy.
    pub report: ValidationReport,
    pub conflicts: Vec<Conflict>,
    pub warnings: Vec<String>,
    pub version: u64,
    /// SHA-256 over the input files, hex.
    pub content_hash: String,
}

fn read(path: &Path) -> Result<Vec<u8>, LoadError> {
    fs::read(path).map_err(|source| LoadError::Io { path: path.into(), source })
}

/// Reads and validates `anatomy.json`, `annotations.ndjson` and the optional
/// palette from the configured data directory.
pub fn load_snapshot(config: &ServiceConfig, version: u64) -> Result<Snapshot, LoadError> {
    let anatomy_path = config.data_dir.join(ANATOMY_FILE);
    let annotations_path = config.data_dir.join(ANNOTATIONS_FILE);
    let palette_path = match &config.palette {
        Some(p) => Some(p.clone()),
        None => Some(config.data_dir.join(PALETTE_FILE)).filter(|p| p.is_file()),
    };
    let file_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| LoadError::File { path, source }
    };

    let anatomy_bytes = read(&anatomy_path)?;
    let annotation_bytes = read(&annotations_path)?;
    let palette_bytes = palette_path.as_deref().map(read).transpose()?;

    let parsed = parse_anatomy(anatomy_bytes.as_slice(), config.mode).map_err(file_err(&anatomy_path))?;
    let ann = parse_annotations(annotation_bytes.as_slice(), &parsed.anatomy, config.mode)
        .map_err(file_err(&annotations_path))?;
    let palette = match (&palette_path, &palette_bytes) {
        (Some(path), Some(bytes)) => parse_palette(bytes.as_slice()).map_err(file_err(path))?,
        _ => Palette::default(),
    };

    let mut hasher = Sha256::new();
    for part in [Some(&anatomy_bytes), Some(&annotation_bytes), palette_bytes.as_ref()] {
        let part = part.map_or(&[][..], Vec::as_slice);
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let mut content_hash = String::with_capacity(64);
    for b in hasher.finalize() {
        let _ = write!(content_hash, "{b:02x}");
    }

    let mut warnings = parsed.warnings;
    warnings.extend(ann.warnings);
    Ok(Snapshot {
        anatomy: parsed.anatomy,
        store: ann.store,
        palette,
        report: parsed.report,
        conflicts: ann.conflicts,
        warnings,
        version,
        content_hash,
    })
}

type CacheKey = (String, u8, ViewMode, u64);

/// LRU cache of full-view expression states, keyed by gene, stage, mode and
/// snapshot version.
pub struct StateCache {
    entries: Mutex<LruCache<CacheKey, Arc<StateMap>>>,
}

impl StateCache {
    pub fn new(capacity: NonZeroUsize) -> Self {
        StateCache { entries: Mutex::new(LruCache::new(capacity)) }
    }

    pub fn states(&self, snapshot: &Snapshot, gene: &GeneSymbol, stage: StageNumber, mode: ViewMode) -> Arc<StateMap> {
        let key = (gene.key().to_string(), stage.get(), mode, snapshot.version);
        if let Some(hit) = self.entries.lock().expect("cache lock").get(&key) {
            return Arc::clone(hit);
        }
        let states = Arc::new(propagate_states(&snapshot.store, &snapshot.anatomy, gene, stage, mode));
        self.entries.lock().expect("cache lock").put(key, Arc::clone(&states));
        states
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.entries.lock().expect("cache lock").clear();
    }
}

/// The live service state: current snapshot plus the state cache.
pub struct AtlasService {
    config: ServiceConfig,
    current: RwLock<Arc<Snapshot>>,
    cache: Option<StateCache>,
    reload_lock: Mutex<()>,
}

impl AtlasService {
    /// Loads version 1.
    pub fn start(config: ServiceConfig) -> Result<AtlasService, LoadError> {
        let snapshot = load_snapshot(&config, 1)?;
        let cache = NonZeroUsize::new(config.cache_size).map(StateCache::new);
        Ok(AtlasService { config, current: RwLock::new(Arc::new(snapshot)), cache, reload_lock: Mutex::new(()) })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().expect("snapshot lock"))
    }

    pub fn cache(&self) -> Option<&StateCache> {
        self.cache.as_ref()
    }

    /// Loads the data directory again and swaps it in as the next version.
    /// On failure the current snapshot stays live.
    pub fn reload(&self) -> Result<u64, LoadError> {
        let _guard = self.reload_lock.lock().expect("reload lock");
        let version = self.snapshot().version + 1;
        let next = Arc::new(load_snapshot(&self.config, version)?);
        *self.current.write().expect("snapshot lock") = next;
        if let Some(cache) = &self.cache {
            cache.clear();
        }
        Ok(version)
    }

    /// Routes one request, including `POST /admin/reload`.
    pub fn handle(&self, method: &str, path: &str, query: &str) -> Response {
        if path == "/admin/reload" {
            if method != "POST" {
                return Response::error(405, "method_not_allowed", "use POST", self.snapshot().version);
            }
            return match self.reload() {
                Ok(version) => Response::json(200, docs::version_doc(version), version),
                Err(e) => Response::error(422, "reload_failed", &e.to_string(), self.snapshot().version),
            };
        }
        let snapshot = self.snapshot();
        handle_request(&snapshot, self.cache.as_ref(), method, path, query)
    }
}
