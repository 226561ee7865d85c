//! Persistent JSON result cache with advisory file locking.
//!
//! One file holds a list of entries keyed by the canonical profile string
//! and the engine version. Writers take an exclusive lock and rewrite the
//! whole file; readers take a shared lock. A corrupted file is ignored with
//! a warning and treated as empty, never as a fatal error.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, Write};
use std::os::unix::io::AsRawFd;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const CACHE_ENV_VAR: &str = "SUBSPACE_DEGREE_CACHE";
pub const DEFAULT_CACHE_PATH: &str = "./.degree-cache.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultCacheEntry {
    /// Canonical key "k=<csv>;n=<csv>", modes in the given order.
    pub key: String,
    pub degree: String,
    /// "num/den"
    pub f: String,
    pub grass_degrees: Vec<String>,
    pub engine_version: String,
    /// Seconds since the Unix epoch at write time.
    pub timestamp: u64,
}

pub fn canonical_key(k: &[u32], n: &[u32]) -> String {
    let join = |v: &[u32]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("k={};n={}", join(k), join(n))
}

/// Resolution order: environment variable, then explicit flag, then the
/// default path next to the working directory.
pub fn resolve_path(flag: Option<&Path>) -> PathBuf {
    if let Ok(env) = std::env::var(CACHE_ENV_VAR) {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    flag.map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_PATH))
}

pub struct Cache {
    path: PathBuf,
}

struct Locked {
    file: File,
}

impl Locked {
    fn acquire(file: File, exclusive: bool) -> std::io::Result<Locked> {
        let op = if exclusive {
            libc::LOCK_EX
        } else {
            libc::LOCK_SH
        };
        if unsafe { libc::flock(file.as_raw_fd(), op) } != 0 {
            return Err(std::io::Error::last_os_error());
        }
        Ok(Locked { file })
    }
}

impl Drop for Locked {
    fn drop(&mut self) {
        unsafe { libc::flock(self.file.as_raw_fd(), libc::LOCK_UN) };
    }
}

impl Cache {
    pub fn at(path: PathBuf) -> Self {
        Cache { path }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn parse(bytes: &[u8], path: &Path) -> Vec<ResultCacheEntry> {
        if bytes.is_empty() {
            return Vec::new();
        }
        match serde_json::from_slice(bytes) {
            Ok(entries) => entries,
            Err(err) => {
                eprintln!(
                    "warning: ignoring corrupted cache file {}: {err}",
                    path.display()
                );
                Vec::new()
            }
        }
    }

    /// All entries, or empty when the file is absent or unreadable.
    pub fn load(&self) -> Vec<ResultCacheEntry> {
        let Ok(file) = File::open(&self.path) else {
            return Vec::new();
        };
        let Ok(mut locked) = Locked::acquire(file, false) else {
            return Vec::new();
        };
        let mut bytes = Vec::new();
        if locked.file.read_to_end(&mut bytes).is_err() {
            return Vec::new();
        }
        Self::parse(&bytes, &self.path)
    }

    pub fn lookup(&self, key: &str, engine_version: &str) -> Option<ResultCacheEntry> {
        self.load()
            .into_iter()
            .find(|e| e.key == key && e.engine_version == engine_version)
    }

    /// Inserts or replaces the entry for its (key, engine_version) pair and
    /// rewrites the file under an exclusive lock.
    pub fn upsert(&self, entry: ResultCacheEntry) -> std::io::Result<()> {
        let file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(&self.path)?;
        let mut locked = Locked::acquire(file, true)?;
        let mut bytes = Vec::new();
        locked.file.read_to_end(&mut bytes)?;
        let mut entries = Self::parse(&bytes, &self.path);
        entries.retain(|e| !(e.key == entry.key && e.engine_version == entry.engine_version));
        entries.push(entry);
        let serialized = serde_json::to_string_pretty(&entries).expect("entries to JSON");
        locked.file.rewind()?;
        locked.file.set_len(0)?;
        locked.file.write_all(serialized.as_bytes())?;
        Ok(())
    }
}

pub fn unix_timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
