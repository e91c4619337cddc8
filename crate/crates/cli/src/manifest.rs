//! Run manifests and the output-directory lock.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::config::{hex, RunConfig};
use crate::error::{CliError, ResultExt};
use crate::files;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(files::LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(CliError::Config(format!(
                "{} is in use by another run (delete {} if that run is gone)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(CliError::Config(format!("cannot lock {}: {e}", dir.display()))),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn hash_file(path: &Path, hasher: &mut Sha256) -> io::Result<()> {
    let mut f = File::open(path)?;
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            return Ok(());
        }
        hasher.update(&buf[..n]);
    }
}

/// SHA-256 of a file, or of a directory's sorted file names and contents.
pub fn sha256_path(path: &Path) -> io::Result<String> {
    let mut hasher = Sha256::new();
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<io::Result<_>>()?;
        entries.retain(|p| p.is_file());
        entries.sort();
        for p in entries {
            hasher.update(p.file_name().unwrap_or_default().as_encoded_bytes());
            hasher.update([0]);
            hash_file(&p, &mut hasher)?;
        }
    } else {
        hash_file(path, &mut hasher)?;
    }
    Ok(hex(&hasher.finalize()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandRecord {
    pub created_at: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub commands: BTreeMap<String, CommandRecord>,
}

impl Manifest {
    pub fn load_or_new(dir: &Path) -> Result<Manifest, CliError> {
        let path = dir.join(files::MANIFEST);
        if !path.exists() {
            return Ok(Manifest {
                tool: "napss".into(),
                version: TOOL_VERSION.into(),
                commands: BTreeMap::new(),
            });
        }
        let text = fs::read_to_string(&path).data(format!("reading {}", path.display()))?;
        serde_json::from_str(&text).data(format!("parsing {}", path.display()))
    }
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>, CliError> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: sha256_path(p).data(format!("hashing {}", p.display()))?,
            })
        })
        .collect()
}

/// Adds or replaces the entry for `command` in `<out>/manifest.json`.
pub fn record(
    config: &RunConfig,
    command: &str,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
    details: Value,
) -> Result<(), CliError> {
    let mut manifest = Manifest::load_or_new(&config.out)?;
    manifest.version = TOOL_VERSION.into();
    let created_at = OffsetDateTime::now_utc()
        .format(&Rfc3339)
        .unwrap_or_else(|_| "unknown".into());
    manifest.commands.insert(
        command.to_owned(),
        CommandRecord {
            created_at,
            seed: config.seed,
            config_sha256: config.hash(),
            config: config.clone(),
            inputs: digests(inputs)?,
            outputs: digests(outputs)?,
            details,
        },
    );
    let path = config.out.join(files::MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").data(format!("writing {}", path.display()))
}
