//! Run directories appear atomically: everything is written to a hidden
//! sibling and renamed into place at the end.

use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::error::{io, CliError, Result};
use crate::manifest::RunManifest;

fn parent(target: &Path) -> PathBuf {
    match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn staging_dir(target: &Path, prefix: &str) -> Result<TempDir> {
    let parent = parent(target);
    fs::create_dir_all(&parent).map_err(io(&parent))?;
    tempfile::Builder::new().prefix(prefix).tempdir_in(&parent).map_err(io(&parent))
}

/// Refuse to touch an existing directory unless forced.
pub fn guard(manifest: &RunManifest, force: bool) -> Result<()> {
    let path = &manifest.out;
    if force || !path.exists() {
        return Ok(());
    }
    let same = fs::read_to_string(path.join("manifest.json"))
        .ok()
        .and_then(|s| serde_json::from_str::<RunManifest>(&s).ok())
        .is_some_and(|m| &m == manifest);
    let reason = if same { "already holds a run of this manifest" } else { "exists and holds something else" };
    Err(CliError::OutputExists { path: path.clone(), reason })
}

/// The single writer of one run directory.
pub struct Staging {
    dir: TempDir,
    target: PathBuf,
}

impl Staging {
    pub fn new(target: &Path) -> Result<Staging> {
        Ok(Staging { dir: staging_dir(target, ".critnls-")?, target: target.to_path_buf() })
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.dir.path().join(name);
        fs::write(&p, bytes).map_err(io(p))
    }

    /// Move the staged files into place; an existing directory is replaced
    /// only when forced.
    pub fn commit(self, force: bool) -> Result<PathBuf> {
        let old = if self.target.exists() {
            if !force {
                return Err(CliError::OutputExists { path: self.target, reason: "appeared while the run was in progress" });
            }
            let trash = staging_dir(&self.target, ".critnls-old-")?;
            fs::rename(&self.target, trash.path().join("old")).map_err(io(&self.target))?;
            Some(trash)
        } else {
            None
        };
        let staged = self.dir.keep();
        if let Err(e) = fs::rename(&staged, &self.target) {
            let _ = fs::remove_dir_all(&staged);
            return Err(CliError::Io { path: self.target, source: e });
        }
        drop(old);
        Ok(self.target)
    }
}
