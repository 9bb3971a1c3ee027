use serde::Serialize;
use speclab_core::covariance::{norm_deviation, tree_cov_closed, CovarianceTable, NormDeviation};
use speclab_core::graph::DistanceTable;

use super::{Context, Task};
use crate::output::{json, Blank, Csv, OutputFile};
use crate::{RunError, Stages};

struct GraphCovariance {
    task: Task,
    diameter: u32,
    lambdas: Vec<f64>,
    table: Option<CovarianceTable>,
    pair_counts: Vec<u64>,
    /// Indexed by `k - k_lo` for `k` in `k_lo..=k_max`.
    norms: Vec<Option<NormDeviation>>,
}

#[derive(Serialize)]
struct GraphSummary {
    index: usize,
    seed: u64,
    diameter: u32,
    /// `M_k` for `k = 0..=k_max`.
    pair_counts: Vec<u64>,
    /// Requested `k` with no vertex pair at that distance.
    no_pairs: Vec<usize>,
}

#[derive(Serialize)]
struct KSummary {
    k: usize,
    graphs: usize,
    mean_delta: Option<f64>,
    sd_delta: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    d: usize,
    ensemble: usize,
    k_min: usize,
    k_max: usize,
    graphs: Vec<GraphSummary>,
    norm_deviation: Vec<KSummary>,
}

fn analyse(ctx: &Context, task: Task, keep_table: bool) -> Result<GraphCovariance, RunError> {
    let c = &ctx.cfg.covariance;
    let g = ctx.graph(task)?;
    let s = ctx.spectrum(&g)?;
    let dist = DistanceTable::compute(&g)?;
    let table = CovarianceTable::compute(&s, &dist, c.k_max);
    let k_lo = c.k_min.max(1);
    let norms = (k_lo..=c.k_max)
        .map(|k| norm_deviation(&table, &s, k))
        .collect();
    Ok(GraphCovariance {
        task,
        diameter: dist.diameter(),
        lambdas: s.eigenvalues().to_vec(),
        pair_counts: table.pair_counts().to_vec(),
        table: keep_table.then_some(table),
        norms,
    })
}

/// Covariance scatter (with `scatter`) and norm deviations per graph.
pub(super) fn run(
    ctx: &Context,
    stages: &mut Stages,
    scatter: bool,
) -> Result<Vec<OutputFile>, RunError> {
    let cfg = ctx.cfg;
    let (n, d) = (cfg.graph.n, cfg.graph.d);
    let (k_min, k_max) = (cfg.covariance.k_min, cfg.covariance.k_max);
    let k_lo = k_min.max(1);
    let results = stages.time("graphs", || ctx.map_tasks(|t| analyse(ctx, t, scatter)))?;

    stages.time("assemble", || {
        let mut files = Vec::new();
        if scatter {
            let mut csv = Csv::new(
                ctx.header,
                &[
                    "graph", "k", "index", "lambda", "cov_emp", "cov_tree", "pairs", "status",
                ],
            );
            for r in &results {
                let table = r.table.as_ref().expect("kept for the scatter");
                for k in k_min..=k_max {
                    let m = r.pair_counts[k];
                    if m == 0 {
                        csv.row(&[
                            &r.task.index,
                            &k,
                            &Blank,
                            &Blank,
                            &Blank,
                            &Blank,
                            &0,
                            &"no_pairs",
                        ]);
                        continue;
                    }
                    for (i, &l) in r.lambdas.iter().enumerate() {
                        let emp = table.get(i, k).expect("pairs exist");
                        let tree = tree_cov_closed(l, k, d);
                        csv.row(&[&r.task.index, &k, &i, &l, &emp, &tree, &m, &"ok"]);
                    }
                }
            }
            files.push(csv.finish("covariance_scatter.csv"));
        }

        let mut csv = Csv::new(
            ctx.header,
            &["graph", "k", "pairs", "n_emp", "n_tree", "delta", "status"],
        );
        for r in &results {
            for (off, nd) in r.norms.iter().enumerate() {
                let k = k_lo + off;
                match nd {
                    Some(nd) => {
                        let delta: &dyn crate::output::Cell = match &nd.delta {
                            Some(x) => x,
                            None => &Blank,
                        };
                        csv.row(&[
                            &r.task.index,
                            &k,
                            &r.pair_counts[k],
                            &nd.n_emp,
                            &nd.n_tree,
                            delta,
                            &"ok",
                        ]);
                    }
                    None => {
                        csv.row(&[&r.task.index, &k, &0, &Blank, &Blank, &Blank, &"no_pairs"]);
                    }
                }
            }
        }
        files.push(csv.finish("norm_deviation.csv"));

        let norm_deviation = (k_lo..=k_max)
            .map(|k| {
                let deltas: Vec<f64> = results
                    .iter()
                    .filter_map(|r| r.norms[k - k_lo].and_then(|nd| nd.delta))
                    .collect();
                let m = deltas.len();
                let mean = (m > 0).then(|| deltas.iter().sum::<f64>() / m as f64);
                let sd = (m > 1).then(|| {
                    let mu = mean.expect("m > 0");
                    (deltas.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
                });
                KSummary {
                    k,
                    graphs: m,
                    mean_delta: mean,
                    sd_delta: sd,
                }
            })
            .collect();
        let summary = Summary {
            n,
            d,
            ensemble: cfg.graph.ensemble,
            k_min,
            k_max,
            graphs: results
                .iter()
                .map(|r| GraphSummary {
                    index: r.task.index,
                    seed: r.task.seed,
                    diameter: r.diameter,
                    pair_counts: r.pair_counts.clone(),
                    no_pairs: (k_min..=k_max).filter(|&k| r.pair_counts[k] == 0).collect(),
                })
                .collect(),
            norm_deviation,
        };
        let name = if scatter {
            "covariance_summary.json"
        } else {
            "norm_deviation_summary.json"
        };
        files.push(json(ctx.header, name, &summary));
        Ok(files)
    })
}
