//! Experiment drivers for `speclab-core`.
//!
//! Each experiment reads an [`ExperimentConfig`], splits the work into one
//! task per graph, runs the tasks on a thread pool and assembles CSV and
//! JSON outputs in task order. Outputs are staged, checksummed into a
//! [`Manifest`] and only then moved into the output directory.

pub mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig};
pub use output::{file_sha256, Checksum, Manifest, StageTiming, TaskSeed, MANIFEST_FILE};

use speclab_core::graph::GraphError;
use speclab_core::nodal::NodalError;
use speclab_core::seeding::derive_seed;
use speclab_core::spectral::SpectralError;
use speclab_core::stats::{HypothesisError, MvnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Experiment {
    Covariance,
    NormDeviation,
    GaussianUnivariate,
    GaussianMultivariate,
    NodalCount,
    Valency,
    SmallDomains,
    PercolationCompare,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Covariance,
        Experiment::NormDeviation,
        Experiment::GaussianUnivariate,
        Experiment::GaussianMultivariate,
        Experiment::NodalCount,
        Experiment::Valency,
        Experiment::SmallDomains,
        Experiment::PercolationCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Covariance => "covariance",
            Experiment::NormDeviation => "norm-deviation",
            Experiment::GaussianUnivariate => "gaussian-univariate",
            Experiment::GaussianMultivariate => "gaussian-multivariate",
            Experiment::NodalCount => "nodal-count",
            Experiment::Valency => "valency",
            Experiment::SmallDomains => "small-domains",
            Experiment::PercolationCompare => "percolation-compare",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 configuration, 3 numerical failure, 4 budget exceeded, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Budget(_) => 4,
            RunError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<GraphError> for RunError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::BudgetExhausted { .. } | GraphError::CensusBudget(_) => {
                RunError::Budget(e.to_string())
            }
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<SpectralError> for RunError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Budget { .. } => RunError::Budget(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<MvnError> for RunError {
    fn from(e: MvnError) -> Self {
        match e {
            MvnError::Precision { .. } => RunError::Budget(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<NodalError> for RunError {
    fn from(e: NodalError) -> Self {
        match e {
            NodalError::Integration(m) => m.into(),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<HypothesisError> for RunError {
    fn from(e: HypothesisError) -> Self {
        match e {
            HypothesisError::Mvn(m) => m.into(),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<speclab_core::stats::ConfigError> for RunError {
    fn from(e: speclab_core::stats::ConfigError) -> Self {
        RunError::Numerical(e.to_string())
    }
}

/// Reads a configuration from a TOML file, or from the `config` snapshot of
/// a run manifest when the path ends in `.json`.
pub fn load_config(path: &Path, experiment: Experiment) -> Result<ExperimentConfig, RunError> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| ConfigError {
            source: path.display().to_string(),
            line: Some(e.line()),
            field: None,
            message: format!("not a run manifest: {e}"),
        })?;
        let source = format!("{}#config", path.display());
        return Ok(ExperimentConfig::parse(
            &manifest.config,
            &source,
            experiment,
        )?);
    }
    Ok(ExperimentConfig::load(path, experiment)?)
}

/// Seed of task `index`: [`derive_seed`] of the master seed and the
/// experiment name.
pub fn task_seed(master: u64, experiment: Experiment, index: usize) -> u64 {
    derive_seed(master, experiment.name(), index as u64)
}

/// Wall-clock bookkeeping for the manifest.
#[derive(Debug, Default)]
pub(crate) struct Stages(Vec<StageTiming>);

impl Stages {
    pub(crate) fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.0.push(StageTiming {
            name: name.to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Runs `experiment` with `jobs` worker threads and writes its outputs and
/// manifest into `out`. Nothing is left in `out` when the run fails.
pub fn run(
    experiment: Experiment,
    cfg: &ExperimentConfig,
    out: &Path,
    jobs: usize,
) -> Result<Manifest, RunError> {
    cfg.validate(experiment)
        .map_err(|(section, key, message)| ConfigError {
            source: "configuration".into(),
            line: None,
            field: Some(match section {
                Some(s) => format!("{s}.{key}"),
                None => key.to_string(),
            }),
            message,
        })?;
    let snapshot = cfg.snapshot(experiment);
    let header = output::Header::new(experiment, snapshot.hash());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Numerical(format!("thread pool: {e}")))?;
    let mut stages = Stages::default();
    let ctx = experiments::Context {
        experiment,
        cfg: &snapshot,
        header: &header,
        pool: &pool,
    };
    let files = experiments::run(&ctx, &mut stages)?;
    let tasks = (0..snapshot.graph.ensemble)
        .map(|index| TaskSeed {
            index,
            seed: task_seed(snapshot.seed, experiment, index),
        })
        .collect();
    let mut manifest = Manifest {
        speclab_version: env!("CARGO_PKG_VERSION").to_string(),
        speclab_core_version: speclab_core::VERSION.to_string(),
        experiment: experiment.name().to_string(),
        config_sha256: header.config_sha256.clone(),
        config: snapshot.to_toml(),
        jobs: jobs.max(1),
        tasks,
        stages: Vec::new(),
        outputs: Vec::new(),
    };
    let t = Instant::now();
    manifest.stages = stages.0;
    output::finalize(out, files, &mut manifest, t)?;
    Ok(manifest)
}
