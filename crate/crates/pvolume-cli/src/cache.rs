//! On-disk result cache keyed by the request hash.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::output::Outputs;

/// Environment variable overriding the default cache directory.
pub const CACHE_ENV: &str = "PVOLUME_CACHE_DIR";
const DEFAULT_DIR: &str = ".pvolume-cache";

/// Flag or config value first, then the environment, then the default.
pub fn cache_dir(configured: Option<&Path>) -> PathBuf {
    configured
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored bundle, or `None` when absent or unreadable.
    pub fn get(&self, key: &str) -> Option<Outputs> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        match serde_json::from_str(&text) {
            Ok(o) => Some(o),
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {key}: {e}");
                None
            }
        }
    }

    /// Writes through a temporary file so readers never see a partial entry.
    pub fn put(&self, key: &str, outputs: &Outputs) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!("{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(outputs).map_err(io::Error::other)?)?;
        fs::rename(&tmp, self.path(key))
    }
}
