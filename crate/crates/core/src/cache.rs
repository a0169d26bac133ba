//! Content-addressed persistent store for computed tables.
//!
//! An entry lives at `<dir>/<h[0..2]>/<h>.json` where `h` is the SHA-256 of the
//! canonical key string. The file repeats the key so that collisions and
//! truncated writes are detected; such entries are recomputed, never trusted.
//! Any I/O failure turns the store off for the rest of the run.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    value: serde_json::Value,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub recomputed: u64,
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    enabled: AtomicBool,
    touched: Mutex<BTreeSet<String>>,
    hits: AtomicU64,
    misses: AtomicU64,
    recomputed: AtomicU64,
}

pub fn digest(key: &str) -> String {
    hex::encode(Sha256::digest(key.as_bytes()))
}

impl Store {
    /// Opens (creating if needed) a store rooted at `dir`. Failure to create the
    /// directory yields a disabled store and a warning.
    pub fn open(dir: impl AsRef<Path>) -> Store {
        let dir = dir.as_ref().to_path_buf();
        let enabled = match fs::create_dir_all(&dir) {
            Ok(()) => true,
            Err(e) => {
                log::warn!("cache directory {} unusable ({e}); continuing without cache", dir.display());
                false
            }
        };
        Store {
            dir,
            enabled: AtomicBool::new(enabled),
            touched: Mutex::new(BTreeSet::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            recomputed: AtomicU64::new(0),
        }
    }

    fn path(&self, h: &str) -> PathBuf {
        self.dir.join(&h[..2]).join(format!("{h}.json"))
    }

    fn disable(&self, what: &str, e: std::io::Error) {
        if self.enabled.swap(false, Ordering::SeqCst) {
            log::warn!("cache {what} failed ({e}); continuing without cache");
        }
    }

    pub fn get<T: for<'de> Deserialize<'de>>(&self, key: &str) -> Option<T> {
        if !self.enabled.load(Ordering::SeqCst) {
            return None;
        }
        let h = digest(key);
        self.touched.lock().expect("cache lock").insert(h.clone());
        let path = self.path(&h);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                return None;
            }
            Err(e) => {
                self.disable("read", e);
                return None;
            }
        };
        let decoded = serde_json::from_str::<Entry>(&text)
            .ok()
            .filter(|entry| entry.key == key)
            .and_then(|entry| serde_json::from_value(entry.value).ok());
        match decoded {
            Some(v) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                Some(v)
            }
            None => {
                log::warn!("corrupted cache entry {}; recomputing", path.display());
                self.recomputed.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) {
        if !self.enabled.load(Ordering::SeqCst) {
            return;
        }
        let h = digest(key);
        self.touched.lock().expect("cache lock").insert(h.clone());
        let entry = Entry {
            key: key.to_string(),
            value: serde_json::to_value(value).expect("serializable value"),
        };
        let path = self.path(&h);
        let text = serde_json::to_string(&entry).expect("serializable entry");
        // write then rename so that concurrent readers never see a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let result = fs::create_dir_all(path.parent().expect("entry has a parent"))
            .and_then(|()| fs::write(&tmp, text))
            .and_then(|()| fs::rename(&tmp, &path));
        if let Err(e) = result {
            self.disable("write", e);
        }
    }

    /// Deletes every entry not read or written since the store was opened.
    /// Returns the number of removed entries.
    pub fn gc(&self) -> usize {
        let touched = self.touched.lock().expect("cache lock");
        let mut removed = 0;
        let Ok(shards) = fs::read_dir(&self.dir) else { return 0 };
        for shard in shards.flatten() {
            let Ok(files) = fs::read_dir(shard.path()) else { continue };
            for file in files.flatten() {
                let path = file.path();
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                if !touched.contains(&stem) && fs::remove_file(&path).is_ok() {
                    removed += 1;
                }
            }
        }
        removed
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            recomputed: self.recomputed.load(Ordering::Relaxed),
        }
    }
}
