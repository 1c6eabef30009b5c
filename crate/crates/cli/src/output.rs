use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ma_core::{ConvexFn, DiscreteMeasure};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Resolved;
use crate::CliError;

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Collects the files of one run and writes the manifest last.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| io(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io(&path, e))?;
        self.files.push(name.into());
        Ok(())
    }

    /// Writes a CSV whose header cells carry units, e.g. `lambda_m [1]`.
    pub fn csv<R: IntoIterator<Item = Vec<String>>>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: R,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        w.write_record(header).map_err(|e| io(&path, e))?;
        for r in rows {
            w.write_record(&r).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| io(&path, e))?;
        self.files.push(name.into());
        Ok(())
    }

    pub fn finish(mut self, command: &str, config: &Resolved) -> Result<PathBuf, CliError> {
        let manifest = Manifest {
            command: command.into(),
            config_hash: config_hash(config),
            seed: config.seed,
            versions: Versions {
                ma_cli: env!("CARGO_PKG_VERSION").into(),
                ma_core: ma_core::VERSION.into(),
            },
            files: self.files.clone(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config: config.clone(),
        };
        self.json("manifest.json", &manifest)?;
        Ok(self.dir)
    }
}

#[derive(Serialize)]
struct Versions {
    ma_cli: String,
    ma_core: String,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config_hash: String,
    seed: u64,
    versions: Versions,
    files: Vec<String>,
    timestamp: u64,
    config: Resolved,
}

/// SHA-256 of the canonical JSON form of the resolved configuration.
pub fn config_hash(config: &Resolved) -> String {
    let canonical = serde_json::to_string(config).expect("configuration serializes");
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Round-trip float formatting for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Nodal function: node coordinates (radial meshes give `[r]`) and values.
#[derive(Serialize)]
pub struct FnDump {
    pub nodes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl From<&ConvexFn> for FnDump {
    fn from(u: &ConvexFn) -> Self {
        let mesh = u.mesh();
        FnDump {
            nodes: (0..mesh.len()).map(|i| mesh.node(i).to_vec()).collect(),
            values: u.values().to_vec(),
        }
    }
}

/// Measure as nonzero node atoms `(index, mass)` plus per-cell masses.
#[derive(Serialize)]
pub struct MeasureDump {
    pub atoms: Vec<(usize, f64)>,
    pub cells: Vec<f64>,
    pub total: f64,
}

impl From<&DiscreteMeasure> for MeasureDump {
    fn from(nu: &DiscreteMeasure) -> Self {
        MeasureDump {
            atoms: nu.atom_list(),
            cells: nu.cells().to_vec(),
            total: nu.total(),
        }
    }
}
