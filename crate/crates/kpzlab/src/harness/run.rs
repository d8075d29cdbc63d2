//! Run configuration, manifests and crash-safe artifact output.
//!
//! A run writes `manifest.json` with `"status": "running"` before any sample
//! file, and a `FAILED` marker that is removed only when the run finalizes.
//! Every artifact is written to a temporary name and renamed into place; the
//! finalized manifest records the SHA-256 of each artifact so that
//! [`verify_manifest`] rejects partially written or modified files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::derive_replica_seed;
use crate::error::{invalid, Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "KPZLAB_OUT";

/// Version string recorded in manifests.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Configuration of one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: String,
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Model parameters by name.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Model selector for experiments that cover several models.
    #[serde(default)]
    pub model: Option<String>,
}

fn default_replicas() -> usize {
    1
}

fn default_workers() -> usize {
    1
}

impl RunConfig {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            replicas: 1,
            workers: 1,
            n_list: Vec::new(),
            params: BTreeMap::new(),
            out: None,
            model: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() {
            return Err(invalid("experiment name is empty"));
        }
        if self.replicas == 0 {
            return Err(invalid("replica count must be at least 1"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Named parameter, or `default` when absent.
    pub fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    /// The output directory: the configured one, else `$KPZLAB_OUT`, else
    /// `./kpzlab-out`, with the experiment name appended.
    pub fn output_dir(&self) -> PathBuf {
        let base = self
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("kpzlab-out"));
        base.join(&self.experiment)
    }
}

/// One artifact entry of a manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub code_version: String,
    pub replica_seeds: Vec<u64>,
    pub status: String,
    pub wall_time_secs: f64,
    pub artifacts: Vec<ArtifactEntry>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// An open run directory.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

const MANIFEST: &str = "manifest.json";
const FAILED: &str = "FAILED";

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl Run {
    /// Creates the output directory, the `FAILED` marker and the initial
    /// manifest.
    pub fn start(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let dir = config.output_dir();
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join(FAILED), b"run did not finalize\n")?;
        let replica_seeds = (0..config.replicas as u64).map(|i| derive_replica_seed(config.seed, i)).collect();
        let manifest = RunManifest {
            config: config.clone(),
            code_version: CODE_VERSION.to_string(),
            replica_seeds,
            status: "running".into(),
            wall_time_secs: 0.0,
            artifacts: Vec::new(),
            notes: Vec::new(),
        };
        let run = Self { dir, manifest, started: Instant::now() };
        run.write_manifest()?;
        Ok(run)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&self) -> &RunConfig {
        &self.manifest.config
    }

    /// Appends a line to the manifest notes.
    pub fn note(&mut self, text: impl Into<String>) {
        self.manifest.notes.push(text.into());
    }

    fn write_manifest(&self) -> Result<()> {
        write_atomic(&self.dir.join(MANIFEST), serde_json::to_string_pretty(&self.manifest)?.as_bytes())
    }

    /// Writes an artifact atomically and records its hash.
    pub fn write_artifact(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if name.contains('/') || name == MANIFEST || name == FAILED {
            return Err(invalid(format!("bad artifact name {name:?}")));
        }
        write_atomic(&self.dir.join(name), bytes)?;
        self.manifest.artifacts.retain(|a| a.file != name);
        self.manifest.artifacts.push(ArtifactEntry {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes a JSON artifact.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write_artifact(name, text.as_bytes())
    }

    /// Writes a CSV artifact from a header and rows.
    pub fn write_csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write_artifact(name, &bytes)
    }

    /// Marks the run complete, writes the final manifest and removes the
    /// `FAILED` marker.
    pub fn finish(mut self) -> Result<RunManifest> {
        self.manifest.status = "complete".into();
        self.manifest.wall_time_secs = self.started.elapsed().as_secs_f64();
        self.write_manifest()?;
        fs::remove_file(self.dir.join(FAILED))?;
        Ok(self.manifest)
    }
}

/// Checks that a run directory is finalized and every artifact matches its
/// recorded hash.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest> {
    if dir.join(FAILED).exists() {
        return Err(invalid(format!("{} carries a FAILED marker", dir.display())));
    }
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    if manifest.status != "complete" {
        return Err(invalid(format!("manifest status is {:?}", manifest.status)));
    }
    for a in &manifest.artifacts {
        let bytes = fs::read(dir.join(&a.file))?;
        if bytes.len() as u64 != a.bytes || sha256_hex(&bytes) != a.sha256 {
            return Err(invalid(format!("artifact {} does not match the manifest", a.file)));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("kpzlab-run-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = RunConfig::from_json(r#"{"experiment":"x","seed":3,"replicas":5,"params":{"t":0.5}}"#).unwrap();
        assert_eq!(cfg.replicas, 5);
        assert_eq!(cfg.param("t", 0.0), 0.5);
        assert_eq!(cfg.param("zeta", 0.25), 0.25);
        assert!(RunConfig::from_json(r#"{"experiment":"x","seed":3,"replicas":0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"x"}"#).is_err());
    }

    #[test]
    fn manifest_lifecycle() {
        let base = temp_dir("life");
        let mut cfg = RunConfig::new("demo", 1);
        cfg.out = Some(base.clone());
        cfg.replicas = 3;
        let mut run = Run::start(&cfg).unwrap();
        assert!(run.dir().join(FAILED).exists());
        run.write_csv("a.csv", &["x", "h"], vec![vec!["1", "2"]]).unwrap();
        let dir = run.dir().to_path_buf();
        assert!(verify_manifest(&dir).is_err());
        let m = run.finish().unwrap();
        assert_eq!(m.replica_seeds.len(), 3);
        assert!(verify_manifest(&dir).is_ok());
        fs::write(dir.join("a.csv"), "x,h\n1,3\n").unwrap();
        assert!(verify_manifest(&dir).is_err());
        let _ = fs::remove_dir_all(base);
    }
}
