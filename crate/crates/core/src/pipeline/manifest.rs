use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(root: &Path) -> Result<Option<Self>> {
        let path = root.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }

    pub fn get(&self, path: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|e| e.path == path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `contents` to `root/rel`, creating parent directories, and returns `rel`.
pub fn write_output(root: &Path, rel: &str, contents: impl AsRef<[u8]>) -> Result<String> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(rel.to_string())
}

/// Records `written` in `root/manifest.json`, keeping earlier entries whose files still
/// exist. Entries are sorted by path so the manifest itself is deterministic.
pub fn update_manifest(root: &Path, written: &[String]) -> Result<Manifest> {
    let mut entries: BTreeMap<String, ManifestEntry> = BTreeMap::new();
    if let Some(old) = Manifest::load(root)? {
        for e in old.files {
            if root.join(&e.path).is_file() {
                entries.insert(e.path.clone(), e);
            }
        }
    }
    for rel in written {
        let path: PathBuf = root.join(rel);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        entries.insert(
            rel.clone(),
            ManifestEntry {
                path: rel.clone(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            },
        );
    }
    let manifest = Manifest {
        files: entries.into_values().collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_output(root, MANIFEST_FILE, text)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_merges_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let b = write_output(dir.path(), "sub/b.txt", "b").unwrap();
        update_manifest(dir.path(), &[b]).unwrap();
        let a = write_output(dir.path(), "a.txt", "a").unwrap();
        let m = update_manifest(dir.path(), &[a]).unwrap();
        let paths: Vec<&str> = m.files.iter().map(|e| e.path.as_str()).collect();
        assert_eq!(paths, ["a.txt", "sub/b.txt"]);
        assert_eq!(m.get("a.txt").unwrap().bytes, 1);
        assert_eq!(Manifest::load(dir.path()).unwrap().unwrap(), m);
    }
}
