//! On-disk document cache keyed by accession id.
//!
//! Layout: `<root>/<shard>/<accession_id>` with a TOML metadata sidecar at
//! `<accession_id>.meta`. The shard is the first two hex digits of the
//! accession id's SHA-256, keeping directories small on large corpora.
//! Writes go through a temp file and an atomic rename so concurrent writers
//! never expose partial content; a data file without its sidecar counts as
//! a miss.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Sidecar contents for one cached document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheMeta {
    pub fetched_at: DateTime<Utc>,
    pub source: String,
    pub bytes: u64,
}

pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)
            .map_err(|e| Error::io("cannot create cache directory", &root, e))?;
        Ok(Cache { root })
    }

    /// Final on-disk path for one accession id.
    pub fn path_for(&self, accession_id: &str) -> PathBuf {
        self.root.join(shard(accession_id)).join(accession_id)
    }

    fn meta_path(&self, accession_id: &str) -> PathBuf {
        self.root
            .join(shard(accession_id))
            .join(format!("{accession_id}.meta"))
    }

    pub fn contains(&self, accession_id: &str) -> bool {
        self.path_for(accession_id).is_file() && self.meta_path(accession_id).is_file()
    }

    /// Cached content and metadata, or None on a miss.
    pub fn get(&self, accession_id: &str) -> Result<Option<(Vec<u8>, CacheMeta)>> {
        let data_path = self.path_for(accession_id);
        let meta_path = self.meta_path(accession_id);
        if !data_path.is_file() || !meta_path.is_file() {
            return Ok(None);
        }
        let content = fs::read(&data_path)
            .map_err(|e| Error::io("cannot read cached document", &data_path, e))?;
        let meta_text = fs::read_to_string(&meta_path)
            .map_err(|e| Error::io("cannot read cache sidecar", &meta_path, e))?;
        let meta: CacheMeta = toml::from_str(&meta_text).map_err(|e| {
            Error::data(format!(
                "corrupt cache sidecar {}: {e}",
                meta_path.display()
            ))
        })?;
        Ok(Some((content, meta)))
    }

    /// Store one document atomically. The sidecar lands after the data file,
    /// so readers seeing the sidecar always see complete data.
    pub fn put(&self, accession_id: &str, content: &[u8], source: &str) -> Result<CacheMeta> {
        let meta = CacheMeta {
            fetched_at: Utc::now(),
            source: source.to_string(),
            bytes: content.len() as u64,
        };
        let data_path = self.path_for(accession_id);
        write_atomic(&data_path, content)?;
        let meta_text = toml::to_string(&meta)
            .map_err(|e| Error::data(format!("cannot serialize cache sidecar: {e}")))?;
        write_atomic(&self.meta_path(accession_id), meta_text.as_bytes())?;
        Ok(meta)
    }
}

fn shard(accession_id: &str) -> String {
    let digest = Sha256::digest(accession_id.as_bytes());
    format!("{:02x}", digest[0])
}

/// Write via a unique temp file in the destination directory plus rename.
fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| Error::data(format!("cache path has no parent: {}", path.display())))?;
    fs::create_dir_all(dir).map_err(|e| Error::io("cannot create cache shard", dir, e))?;
    let tmp = dir.join(format!(
        ".tmp.{}.{}",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, content).map_err(|e| Error::io("cannot write cache temp file", &tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io("cannot finalize cache file", path, e)
    })
}
