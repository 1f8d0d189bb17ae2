//! Content-addressed store of emitted CSV text, keyed by the spec.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::spec::SweepSpec;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "UPLINK_CACHE_DIR";

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default location: `$XDG_CACHE_HOME/uplink`, else `~/.cache/uplink`, else
/// `.uplink-cache` in the working directory.
pub fn cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(dir).join("uplink");
    }
    if let Some(home) = std::env::var_os("HOME").filter(|d| !d.is_empty()) {
        return PathBuf::from(home).join(".cache").join("uplink");
    }
    PathBuf::from(".uplink-cache")
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    tool: &'static str,
    version: &'a str,
    spec: &'a SweepSpec,
}

/// SHA-256 of the canonical JSON of the run description and tool version.
pub fn cache_key(spec: &SweepSpec, version: &str) -> String {
    let material = KeyMaterial {
        tool: "uplink",
        version,
        spec,
    };
    let json = serde_json::to_string(&material).expect("spec serializes");
    sha256_hex(json.as_bytes())
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    digest: String,
    csv: String,
}

/// Directory of cache entries, one JSON file per key.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Stored CSV for `key`. Unreadable or inconsistent entries are removed
    /// with a warning and reported as a miss.
    pub fn lookup(&self, key: &str) -> Option<String> {
        let path = self.entry_path(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cache entry {} unreadable ({e}); recomputing", path.display());
                return None;
            }
        };
        match serde_json::from_str::<Entry>(&text) {
            Ok(entry) if entry.key == key && entry.digest == sha256_hex(entry.csv.as_bytes()) => Some(entry.csv),
            _ => {
                log::warn!("discarding corrupt cache entry {}", path.display());
                let _ = std::fs::remove_file(&path);
                None
            }
        }
    }

    /// Stores `csv` under `key`, writing to a temporary file first so a
    /// partial write is never visible.
    pub fn store(&self, key: &str, csv: &str) -> CliResult<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let entry = Entry {
            key: key.to_string(),
            digest: sha256_hex(csv.as_bytes()),
            csv: csv.to_string(),
        };
        let path = self.entry_path(key);
        let tmp = self.dir.join(format!("{key}.{}.tmp", std::process::id()));
        let json = serde_json::to_string(&entry).expect("entry serializes");
        std::fs::write(&tmp, json).map_err(|e| CliError::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))
    }
}
