//! Artifact cache and atomic output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "PCF_CACHE_DIR";

/// Named output bytes. The first part goes to `--out`, the others next to
/// it as `<out>.<suffix>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub suffix: String,
    pub bytes: Vec<u8>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

/// Content-addressed store: `<root>/<key[..2]>/<key>/<index>`.
pub struct Cache {
    root: PathBuf,
}

#[derive(Serialize, serde::Deserialize)]
struct Index {
    suffixes: Vec<String>,
}

impl Cache {
    pub fn open(explicit: Option<&Path>, disabled: bool) -> Option<Cache> {
        if disabled {
            return None;
        }
        let root = explicit.map(Path::to_path_buf).or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))?;
        Some(Cache { root })
    }

    fn dir(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(key)
    }

    pub fn load(&self, key: &str) -> Option<Vec<Part>> {
        let dir = self.dir(key);
        let index: Index = serde_json::from_slice(&fs::read(dir.join("index.json")).ok()?).ok()?;
        index
            .suffixes
            .iter()
            .enumerate()
            .map(|(i, s)| Some(Part { suffix: s.clone(), bytes: fs::read(dir.join(i.to_string())).ok()? }))
            .collect()
    }

    /// Parts first, index last, so a reader never sees a partial entry.
    pub fn store(&self, key: &str, parts: &[Part]) -> Result<()> {
        let dir = self.dir(key);
        for (i, p) in parts.iter().enumerate() {
            write_atomic(&dir.join(i.to_string()), &p.bytes)?;
        }
        let index = Index { suffixes: parts.iter().map(|p| p.suffix.clone()).collect() };
        write_atomic(&dir.join("index.json"), &serde_json::to_vec(&index)?)
    }
}
