//! Output directory bookkeeping and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fracns::grid::Field;
use fracns::mild::Trajectory;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::CliError;

const MARKER: &str = ".incomplete";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub exit_code: i32,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub versions: BTreeMap<String, String>,
    pub started_unix: u64,
    pub wall_clock_secs: f64,
    pub status: String,
    pub failure: Option<Failure>,
    pub files: Vec<FileEntry>,
    /// Directories left without their completion mark.
    pub invalid: Vec<String>,
}

impl RunManifest {
    pub fn file_name(subcommand: &str) -> String {
        format!("{subcommand}.manifest.json")
    }
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("fracns".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("fnsv".to_string(), fracns::io::VERSION.to_string()),
        ("manifest".to_string(), "1".to_string()),
    ])
}

pub fn sha256_file(path: &Path) -> std::io::Result<(String, u64)> {
    let bytes = fs::read(path)?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

/// Files written by one run, relative to the output directory.
#[derive(Debug)]
pub struct Artifacts {
    root: PathBuf,
    files: Vec<String>,
    dirs: Vec<String>,
}

/// Persisted trajectory metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryIndex {
    pub times: Vec<f64>,
    pub config_hash: Option<String>,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn new(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            dirs: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        if !self.files.iter().any(|f| f == rel) {
            self.files.push(rel.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(rel, text.as_bytes())
    }

    /// Numeric table as `<stem>.csv` or `<stem>.json`; returns the file name.
    pub fn write_table(&mut self, stem: &str, format: Format, header: &[&str], rows: &[Vec<f64>]) -> Result<String, CliError> {
        match format {
            Format::Csv => {
                let mut s = header.join(",");
                s.push('\n');
                for row in rows {
                    s.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                let name = format!("{stem}.csv");
                self.write_bytes(&name, s.as_bytes())?;
                Ok(name)
            }
            Format::Json => {
                let table: Vec<BTreeMap<&str, f64>> = rows.iter().map(|r| header.iter().copied().zip(r.iter().copied()).collect()).collect();
                let name = format!("{stem}.json");
                self.write_json(&name, &table)?;
                Ok(name)
            }
        }
    }

    /// Write a trajectory as one FNSV file per node plus `trajectory.json`.
    ///
    /// The directory carries a marker file until the last byte is written.
    pub fn write_trajectory(&mut self, dir: &str, traj: &Trajectory) -> Result<(), CliError> {
        let path = self.root.join(dir);
        fs::create_dir_all(&path)?;
        fs::write(path.join(MARKER), b"")?;
        self.dirs.push(dir.to_string());
        let mut files = Vec::with_capacity(traj.len());
        for (i, snap) in traj.physical().iter().enumerate() {
            let name = format!("u_{i:04}.fnsv");
            let mut buf = Vec::new();
            fracns::io::write_field(&mut buf, snap)?;
            self.write_bytes(&format!("{dir}/{name}"), &buf)?;
            files.push(name);
        }
        let index = TrajectoryIndex {
            times: traj.times.clone(),
            config_hash: traj.config_hash.clone(),
            files,
        };
        self.write_json(&format!("{dir}/trajectory.json"), &index)?;
        fs::remove_file(path.join(MARKER))?;
        Ok(())
    }

    pub fn entries(&self) -> Vec<FileEntry> {
        self.files
            .iter()
            .filter_map(|rel| {
                let (sha256, bytes) = sha256_file(&self.root.join(rel)).ok()?;
                Some(FileEntry {
                    path: rel.clone(),
                    sha256,
                    bytes,
                })
            })
            .collect()
    }

    pub fn invalid_dirs(&self) -> Vec<String> {
        self.dirs.iter().filter(|d| self.root.join(d).join(MARKER).exists()).cloned().collect()
    }
}

pub fn write_manifest(root: &Path, manifest: &RunManifest) -> std::io::Result<PathBuf> {
    fs::create_dir_all(root)?;
    let path = root.join(RunManifest::file_name(&manifest.subcommand));
    let mut text = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Load a trajectory directory written by [`Artifacts::write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<Trajectory, CliError> {
    if dir.join(MARKER).exists() {
        return Err(CliError::Io(format!("{} is an incomplete trajectory directory", dir.display())));
    }
    let text = fs::read_to_string(dir.join("trajectory.json")).map_err(|e| CliError::Io(format!("cannot read {}: {e}", dir.display())))?;
    let index: TrajectoryIndex = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("bad trajectory index: {e}")))?;
    if index.files.len() != index.times.len() {
        return Err(CliError::Io("trajectory index lists a different number of files and times".into()));
    }
    let mut snapshots = Vec::with_capacity(index.files.len());
    for name in &index.files {
        let f: Field = fracns::io::load(dir.join(name))?;
        snapshots.push(fracns::grid::forward_transform(&f)?);
    }
    Ok(Trajectory {
        times: index.times,
        snapshots,
        config_hash: index.config_hash,
    })
}
