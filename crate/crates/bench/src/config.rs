//! Experiment configuration, read from TOML:
//!
//! ```toml
//! formats = ["CSR", "COO", "DIA"]   # default: all eight
//! partition_sizes = [8, 16, 32]     # default
//! verify_spmv = true
//!
//! [[workloads]]
//! kind = "random"
//! n = 512
//! density = 0.01
//! seed = 7
//!
//! [[workloads]]
//! kind = "file"
//! path = "data/dwt_918.mtx"         # relative to the config file
//!
//! [output]
//! format = "csv"
//! path = "random.csv"               # relative to the output directory
//!
//! [cost]                            # optional CostConfig overrides
//! bus_bytes_per_cycle = 8
//!
//! [params]                          # optional FormatParams overrides
//! value_width_bytes = 4
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spformat::{CostConfig, FormatId, FormatParams, WorkloadSpec};

use crate::error::{BenchError, Result};

/// Environment variable overriding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SPFMT_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    pub path: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            format: OutputFormat::Csv,
            path: PathBuf::from("report.csv"),
        }
    }
}

impl OutputSpec {
    /// Relative paths land under `$SPFMT_OUTPUT_DIR`, or `results/`.
    pub fn resolved_path(&self) -> PathBuf {
        if self.path.is_absolute() {
            return self.path.clone();
        }
        let dir = std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        dir.join(&self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub workloads: Vec<WorkloadSpec>,
    #[serde(default = "all_formats")]
    pub formats: Vec<FormatId>,
    #[serde(default = "default_sizes")]
    pub partition_sizes: Vec<usize>,
    #[serde(default)]
    pub cost: CostConfig,
    #[serde(default)]
    pub params: FormatParams,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub verify_spmv: bool,
}

fn all_formats() -> Vec<FormatId> {
    FormatId::ALL.to_vec()
}

fn default_sizes() -> Vec<usize> {
    vec![8, 16, 32]
}

impl ExperimentConfig {
    pub fn new(workloads: Vec<WorkloadSpec>) -> Self {
        Self {
            workloads,
            formats: all_formats(),
            partition_sizes: default_sizes(),
            cost: CostConfig::default(),
            params: FormatParams::default(),
            output: OutputSpec::default(),
            verify_spmv: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Reads a config file. Relative workload file paths are taken relative
    /// to the directory holding the config.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Self = toml::from_str(&text).map_err(|e| BenchError::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for w in &mut config.workloads {
            if let WorkloadSpec::File { path: file } = w {
                if Path::new(file.as_str()).is_relative() {
                    *file = base.join(&*file).to_string_lossy().into_owned();
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workloads.is_empty() {
            return Err(BenchError::Config("no workloads".into()));
        }
        if self.formats.is_empty() {
            return Err(BenchError::Config("no formats".into()));
        }
        if self.partition_sizes.is_empty() {
            return Err(BenchError::Config("no partition sizes".into()));
        }
        self.cost.validate()?;
        self.params.validate()?;
        for &p in &self.partition_sizes {
            if p < 2 {
                return Err(BenchError::Config(format!("partition size {p} < 2")));
            }
            if self.formats.contains(&FormatId::Bcsr) {
                self.params.validate_for(p)?;
            }
        }
        for w in &self.workloads {
            w.validate().map_err(|source| BenchError::Workload {
                label: w.label(),
                source,
            })?;
            if let WorkloadSpec::File { path } = w {
                if !Path::new(path).is_file() {
                    return Err(BenchError::Config(format!("workload file {path} does not exist")));
                }
            }
        }
        Ok(())
    }
}
