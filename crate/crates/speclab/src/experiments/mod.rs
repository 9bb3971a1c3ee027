mod covariance;
mod gaussian;
mod nodal;

use rayon::prelude::*;
use rayon::ThreadPool;
use speclab_core::graph::{generate_regular, GenerateOptions, RegularGraph};
use speclab_core::nodal::{NodalOptions, ZeroPolicy};
use speclab_core::spectral::{eigendecompose, EigenOptions, Spectrum, Tolerances};
use speclab_core::stats::MvnOptions;

use crate::config::{ExperimentConfig, ZeroPolicyName};
use crate::output::{Header, OutputFile};
use crate::{task_seed, Experiment, RunError, Stages};

pub(crate) struct Context<'a> {
    pub experiment: Experiment,
    pub cfg: &'a ExperimentConfig,
    pub header: &'a Header,
    pub pool: &'a ThreadPool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Task {
    pub index: usize,
    pub seed: u64,
}

impl Context<'_> {
    fn tasks(&self) -> Vec<Task> {
        (0..self.cfg.graph.ensemble)
            .map(|index| Task {
                index,
                seed: task_seed(self.cfg.seed, self.experiment, index),
            })
            .collect()
    }

    /// Runs `f` on every task in the pool; results come back in task order.
    fn map_tasks<T, F>(&self, f: F) -> Result<Vec<T>, RunError>
    where
        T: Send,
        F: Fn(Task) -> Result<T, RunError> + Sync,
    {
        let tasks = self.tasks();
        self.pool
            .install(|| tasks.par_iter().map(|&t| f(t)).collect())
    }

    fn graph(&self, task: Task) -> Result<RegularGraph, RunError> {
        let g = &self.cfg.graph;
        let opts = GenerateOptions {
            max_attempts: g.max_attempts,
            require_connected: g.require_connected,
        };
        Ok(generate_regular(g.n, g.d, task.seed, opts)?)
    }

    fn tolerances(&self) -> Tolerances {
        let t = &self.cfg.tolerances;
        Tolerances {
            eig: t.eig,
            orth: t.orth,
            sum: t.sum,
        }
    }

    /// Full eigendecomposition, rejected when residuals or orthogonality on
    /// a sample of eigenvectors miss the configured tolerances.
    fn spectrum(&self, g: &RegularGraph) -> Result<Spectrum, RunError> {
        let opts = EigenOptions {
            max_n: self.cfg.tolerances.max_n,
            ..Default::default()
        };
        let s = eigendecompose(g, opts)?;
        let n = g.n();
        let sample: Vec<usize> = (0..n).step_by((n / 16).max(1)).collect();
        let check = s.check(g, &sample);
        if !check.passes(n, g.d(), &self.tolerances(), g.is_connected()) {
            return Err(RunError::Numerical(format!(
                "eigendecomposition misses its tolerances: {check:?}"
            )));
        }
        Ok(s)
    }

    fn nodal_options(&self) -> NodalOptions {
        NodalOptions {
            zero_tol: self.cfg.tolerances.zero,
            policy: match self.cfg.nodal.zero_policy {
                ZeroPolicyName::Reject => ZeroPolicy::Reject,
                ZeroPolicyName::Perturb => ZeroPolicy::Perturb,
            },
        }
    }

    fn mvn_options(&self) -> MvnOptions {
        MvnOptions {
            target_se: self.cfg.nodal.mvn_se,
            seed: self.cfg.seed,
            ..Default::default()
        }
    }
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

pub(crate) fn run(ctx: &Context, stages: &mut Stages) -> Result<Vec<OutputFile>, RunError> {
    match ctx.experiment {
        Experiment::Covariance => covariance::run(ctx, stages, true),
        Experiment::NormDeviation => covariance::run(ctx, stages, false),
        Experiment::GaussianUnivariate => gaussian::univariate(ctx, stages),
        Experiment::GaussianMultivariate => gaussian::multivariate(ctx, stages),
        Experiment::NodalCount => nodal::count(ctx, stages),
        Experiment::Valency => nodal::valency(ctx, stages),
        Experiment::SmallDomains => nodal::small_domains(ctx, stages),
        Experiment::PercolationCompare => nodal::percolation(ctx, stages),
    }
}
