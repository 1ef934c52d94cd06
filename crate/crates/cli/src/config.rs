//! Run configuration files (TOML, schema version 1).
//!
//! ```toml
//! version = 1
//!
//! [[datasets]]
//! name = "drosophila"
//! edges = "drosophila.edges"      # relative paths resolve against the data dir
//! coupling_policy = "derive_shared_label"
//!
//! [sweep]
//! kind = "benchmark"
//!
//! [settings]
//! runs = 20
//! master_seed = 1
//!
//! [settings.model]
//! hidden_dims = [128, 128]
//!
//! [output]
//! dir = "results"
//! format = "csv"
//! ```

use std::path::{Path, PathBuf};

use multisage::experiments::{OutputFormat, RunSettings, SweepKind};
use multisage::graph::MultiplexGraph;
use multisage::ingest::{load_multiplex, CouplingPolicy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub edges: PathBuf,
    #[serde(default)]
    pub couplings: Option<PathBuf>,
    #[serde(default)]
    pub coupling_policy: CouplingPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub datasets: Vec<DatasetConfig>,
    #[serde(default)]
    pub sweep: Option<SweepKind>,
    #[serde(default)]
    pub settings: RunSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                config.version
            )));
        }
        let mut names: Vec<&str> = config.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("dataset names must be unique".into()));
        }
        config
            .settings
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The dataset called `name`, or the only one when `name` is absent.
    pub fn dataset(&self, name: Option<&str>) -> Result<&DatasetConfig, CliError> {
        match name {
            Some(n) => self
                .datasets
                .iter()
                .find(|d| d.name == n)
                .ok_or_else(|| CliError::Config(format!("no dataset named {n:?}"))),
            None => match self.datasets.as_slice() {
                [d] => Ok(d),
                [] => Err(CliError::Config("config lists no dataset".into())),
                _ => Err(CliError::Config(
                    "several datasets configured; pick one with --dataset".into(),
                )),
            },
        }
    }
}

/// Absolute paths are kept; relative ones are taken from `data_dir` when given.
pub fn resolve(path: &Path, data_dir: Option<&Path>) -> PathBuf {
    match data_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

pub fn load_dataset(
    d: &DatasetConfig,
    data_dir: Option<&Path>,
) -> Result<MultiplexGraph, CliError> {
    let edges = resolve(&d.edges, data_dir);
    if !edges.is_file() {
        return Err(CliError::Data(format!(
            "dataset file {} not found",
            edges.display()
        )));
    }
    let couplings = d.couplings.as_ref().map(|c| resolve(c, data_dir));
    log::info!("loading {} from {}", d.name, edges.display());
    Ok(load_multiplex(
        &edges,
        couplings.as_deref(),
        d.coupling_policy,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse("version = 1\n").unwrap();
        assert_eq!(c.settings, RunSettings::default());
        assert!(c.sweep.is_none());
        assert_eq!(c.output, OutputConfig::default());
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        for text in [
            "version = 2\n",
            "version = 1\nbogus = 3\n",
            "version = 1\n[settings]\nrun = 3\n",
            "version = 1\n[settings.model]\nhidden = [3]\n",
            "version = 1\n[sweep]\nkind = \"nonsense\"\n",
            "version = 1\n[settings]\nruns = 0\n",
            "[settings]\nruns = 2\n",
        ] {
            assert!(
                matches!(RunConfig::parse(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn full_config() {
        let c = RunConfig::parse(
            r#"
version = 1
[[datasets]]
name = "a"
edges = "a.edges"
[[datasets]]
name = "b"
edges = "/abs/b.edges"
couplings = "b.couplings"
coupling_policy = "explicit"
[sweep]
kind = "ws_sweep"
n = 200
phi_grid = [0.0, 1.0]
[settings]
runs = 3
modes = ["graphsage"]
[settings.train]
epochs = 5
[output]
format = "json"
"#,
        )
        .unwrap();
        assert_eq!(c.settings.runs, 3);
        assert_eq!(c.settings.train.epochs, 5);
        assert_eq!(c.datasets[1].coupling_policy, CouplingPolicy::Explicit);
        assert_eq!(
            c.sweep,
            Some(SweepKind::WsSweep {
                n: 200,
                k: 4,
                phi_grid: vec![0.0, 1.0]
            })
        );
        assert!(c.dataset(None).is_err());
        assert_eq!(c.dataset(Some("b")).unwrap().name, "b");
        let dir = Path::new("/data");
        assert_eq!(
            resolve(&c.datasets[0].edges, Some(dir)),
            PathBuf::from("/data/a.edges")
        );
        assert_eq!(
            resolve(&c.datasets[1].edges, Some(dir)),
            PathBuf::from("/abs/b.edges")
        );
    }
}
