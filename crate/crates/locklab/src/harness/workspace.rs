//! Staged, access-tracked experiment directories.
//!
//! Every file the pipeline touches goes through a [`Workspace`], which
//! records a `(stage, path, direction)` triple per access. The log exists
//! so isolation properties can be enforced mechanically instead of by
//! convention; the one that matters most is that attack stages never open
//! a `.key` file.
//!
//! Stages cache their outputs behind a stamp file holding a digest of the
//! stage inputs. A rerun with unchanged inputs loads the cached outputs;
//! a missing or stale stamp, or a cached output that fails to load,
//! triggers a recompute that rewrites both outputs and stamp.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Lock,
    Resynth,
    AttackOl,
    AttackOg,
    AttackDip,
    Score,
    Report,
}

impl Stage {
    /// Stages that act as the attacker and therefore must not see ground
    /// truth.
    pub fn is_attack(self) -> bool {
        matches!(self, Stage::AttackOl | Stage::AttackOg | Stage::AttackDip)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Lock => "lock",
            Stage::Resynth => "resynth",
            Stage::AttackOl => "attack-ol",
            Stage::AttackOg => "attack-og",
            Stage::AttackDip => "attack-dip",
            Stage::Score => "score",
            Stage::Report => "report",
        }
    }
}

/// One recorded file access.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Access {
    pub stage: Stage,
    pub path: PathBuf,
    pub write: bool,
}

/// An experiment output directory plus the access log.
///
/// Relative paths resolve against the root; absolute paths (input circuits
/// living elsewhere) pass through untouched. Either way the access is
/// logged under the stage that asked.
pub struct Workspace {
    root: PathBuf,
    log: Mutex<Vec<Access>>,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Workspace {
        Workspace { root: root.into(), log: Mutex::new(Vec::new()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn resolve(&self, rel: impl AsRef<Path>) -> PathBuf {
        let rel = rel.as_ref();
        if rel.is_absolute() {
            rel.to_path_buf()
        } else {
            self.root.join(rel)
        }
    }

    fn record(&self, stage: Stage, path: &Path, write: bool) {
        self.log.lock().unwrap().push(Access { stage, path: path.to_path_buf(), write });
    }

    pub fn read(&self, stage: Stage, rel: impl AsRef<Path>) -> Result<String, HarnessError> {
        let path = self.resolve(rel);
        self.record(stage, &path, false);
        fs::read_to_string(&path).map_err(|source| HarnessError::Io { path, source })
    }

    pub fn write(&self, stage: Stage, rel: impl AsRef<Path>, contents: &str) -> Result<(), HarnessError> {
        let path = self.resolve(rel);
        self.record(stage, &path, true);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .map_err(|source| HarnessError::Io { path: parent.to_path_buf(), source })?;
        }
        fs::write(&path, contents).map_err(|source| HarnessError::Io { path, source })
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(
        &self,
        stage: Stage,
        rel: impl AsRef<Path>,
    ) -> Result<T, HarnessError> {
        let path = self.resolve(&rel);
        let text = self.read(stage, rel)?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json { path, source })
    }

    pub fn write_json<T: Serialize>(
        &self,
        stage: Stage,
        rel: impl AsRef<Path>,
        value: &T,
    ) -> Result<(), HarnessError> {
        let path = self.resolve(&rel);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|source| HarnessError::Json { path, source })?;
        text.push('\n');
        self.write(stage, rel, &text)
    }

    /// Existence probe; not logged because no contents flow.
    pub fn exists(&self, rel: impl AsRef<Path>) -> bool {
        self.resolve(rel).exists()
    }

    pub fn accesses(&self) -> Vec<Access> {
        self.log.lock().unwrap().clone()
    }

    /// Paths read (not written) by the given stage, in access order.
    pub fn reads_in(&self, stage: Stage) -> Vec<PathBuf> {
        self.log
            .lock()
            .unwrap()
            .iter()
            .filter(|a| a.stage == stage && !a.write)
            .map(|a| a.path.clone())
            .collect()
    }
}

/// Hex digest used for stage stamps and cache keys.
pub fn content_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// Runs one cached stage. When `stamp` already holds `input_hash` and
/// `load` succeeds, the cached value is returned with `fresh = false`.
/// Otherwise `compute` runs (writing its own outputs through the
/// workspace) and the stamp is rewritten afterwards, so an interrupted
/// compute never leaves a valid stamp over partial outputs.
pub(crate) fn cached_stage<T>(
    ws: &Workspace,
    stage: Stage,
    stamp: &str,
    input_hash: &str,
    load: impl FnOnce() -> Result<T, HarnessError>,
    compute: impl FnOnce() -> Result<T, HarnessError>,
) -> Result<(T, bool), HarnessError> {
    if let Ok(prev) = ws.read(stage, stamp) {
        if prev.trim() == input_hash {
            if let Ok(v) = load() {
                return Ok((v, false));
            }
        }
    }
    let v = compute()?;
    ws.write(stage, stamp, input_hash)?;
    Ok((v, true))
}

/// Encodes one CSV record; fields containing a comma, quote, or newline
/// are quoted with internal quotes doubled.
pub fn csv_record(fields: &[String]) -> String {
    let mut out = String::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if f.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&f.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(f);
        }
    }
    out.push('\n');
    out
}
