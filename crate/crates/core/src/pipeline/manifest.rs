use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the output directory for stage artifacts; as given for
    /// external inputs.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// What one stage read and wrote.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub version: u32,
    pub seed: Option<u64>,
    pub stage_seed: Option<u64>,
    pub nondeterministic: bool,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub duration_ms: u64,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn output(&self, rel: &str) -> Option<&FileDigest> {
        self.outputs.iter().find(|d| d.path == rel)
    }
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

fn rel_string(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Book-keeping for a stage in progress: files are recorded as they are
/// read or written, and [`StageRun::finish`] writes the manifest.
pub struct StageRun {
    out: PathBuf,
    stage: String,
    manifest: RunManifest,
    started: Instant,
}

impl StageRun {
    pub fn begin(
        out: &Path,
        stage: &str,
        seed: Option<u64>,
        stage_seed: Option<u64>,
        nondeterministic: bool,
        config: serde_json::Value,
    ) -> Result<Self> {
        let dir = out.join(stage);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let stale = dir.join(MANIFEST_FILE);
        if stale.exists() {
            std::fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
        }
        Ok(StageRun {
            out: out.to_path_buf(),
            stage: stage.to_string(),
            manifest: RunManifest {
                stage: stage.to_string(),
                version: 1,
                seed,
                stage_seed,
                nondeterministic,
                config,
                inputs: Vec::new(),
                outputs: Vec::new(),
                duration_ms: 0,
            },
            started: Instant::now(),
        })
    }

    pub fn dir(&self) -> PathBuf {
        self.out.join(&self.stage)
    }

    /// Path of an artifact of this stage.
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir().join(name)
    }

    /// Locates `name` among the outputs of a finished earlier stage,
    /// checks its digest, and records it as an input.
    pub fn prior(&mut self, stage: &str, name: &str) -> Result<PathBuf> {
        let mpath = self.out.join(stage).join(MANIFEST_FILE);
        if !mpath.exists() {
            return Err(Error::Contract(format!(
                "stage {stage} has no manifest under {}; run it first",
                self.out.display()
            )));
        }
        let m = RunManifest::load(&mpath)?;
        let rel = format!("{stage}/{name}");
        let want = m
            .output(&rel)
            .ok_or_else(|| Error::Contract(format!("{rel} is not listed in the {stage} manifest")))?
            .clone();
        let path = self.out.join(stage).join(name);
        let (sha, _) = sha256_file(&path)?;
        if sha != want.sha256 {
            return Err(Error::Contract(format!("{rel} changed since stage {stage} wrote it")));
        }
        if !self.manifest.inputs.contains(&want) {
            self.manifest.inputs.push(want);
        }
        Ok(path)
    }

    /// Records a file from outside the output tree as an input.
    pub fn external(&mut self, path: &Path) -> Result<()> {
        let (sha256, bytes) = sha256_file(path)?;
        self.manifest.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256,
            bytes,
        });
        Ok(())
    }

    /// Records an artifact already written to [`StageRun::path`].
    pub fn record(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.path(name);
        let (sha256, bytes) = sha256_file(&path)?;
        let rel = rel_string(&Path::new(&self.stage).join(name));
        self.manifest.outputs.retain(|d| d.path != rel);
        self.manifest.outputs.push(FileDigest { path: rel, sha256, bytes });
        Ok(path)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.record(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn finish(mut self) -> Result<RunManifest> {
        self.manifest.duration_ms = self.started.elapsed().as_millis() as u64;
        let path = self.path(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(self.manifest)
    }
}
