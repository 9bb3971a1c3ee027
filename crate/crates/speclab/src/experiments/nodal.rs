use rayon::prelude::*;
use serde::Serialize;
use speclab_core::nodal::{
    expected_small_domains, induce_nodal, nodal_count_curve, nodal_lower_bound, nodal_scan,
    p_e_gaussian, p_j_gaussian_all, p_j_percolation, percolation_scan, threshold_crossing,
    CountPoint, GiantPoint, LambdaBins, GIANT_THRESHOLD,
};
use speclab_core::seeding::derive_seed;
use speclab_core::spectral::spectral_edge;

use super::{linspace, Context, Task};
use crate::output::{json, Csv, OutputFile};
use crate::{RunError, Stages};

#[derive(Serialize)]
struct CountGraph {
    graph: usize,
    seed: u64,
    eigenvectors: usize,
    below_bound: usize,
    above_courant: usize,
}

#[derive(Serialize)]
struct CountSummary {
    n: usize,
    d: usize,
    ensemble: usize,
    graphs: Vec<CountGraph>,
}

pub(super) fn count(ctx: &Context, stages: &mut Stages) -> Result<Vec<OutputFile>, RunError> {
    let cfg = ctx.cfg;
    let (n, d) = (cfg.graph.n, cfg.graph.d);
    let results: Vec<(Task, Vec<CountPoint>)> = stages.time("graphs", || {
        ctx.map_tasks(|task| {
            let g = ctx.graph(task)?;
            let s = ctx.spectrum(&g)?;
            Ok((task, nodal_count_curve(&g, &s, ctx.nodal_options())?))
        })
    })?;

    stages.time("assemble", || {
        let mut curve = Csv::new(
            ctx.header,
            &["graph", "index", "lambda", "nu", "bound", "courant"],
        );
        let bins = LambdaBins::kesten_mckay(d, cfg.nodal.bins);
        let mut per_bin = vec![(0usize, 0.0f64, 0usize); bins.count];
        let mut graphs = Vec::new();
        for (task, points) in &results {
            for p in points {
                curve.row(&[
                    &task.index,
                    &p.index,
                    &p.lambda,
                    &p.nu,
                    &p.bound,
                    &p.courant,
                ]);
                // the constant eigenvector sits outside the support and no bin
                if let Some(b) = bins.bin_of(p.lambda) {
                    let e = &mut per_bin[b];
                    e.0 += 1;
                    e.1 += p.nu as f64;
                    e.2 += usize::from((p.nu as f64) < p.bound);
                }
            }
            graphs.push(CountGraph {
                graph: task.index,
                seed: task.seed,
                eigenvectors: points.len(),
                below_bound: points.iter().filter(|p| (p.nu as f64) < p.bound).count(),
                above_courant: points.iter().filter(|p| p.nu > p.courant).count(),
            });
        }
        let mut binned = Csv::new(
            ctx.header,
            &[
                "bin",
                "lambda",
                "eigenvectors",
                "mean_nu_over_n",
                "bound_over_n",
                "below_bound_fraction",
            ],
        );
        for (b, &(count, sum, below)) in per_bin.iter().enumerate() {
            if count < cfg.nodal.min_bin_count {
                continue;
            }
            let l = bins.center(b);
            let bound = nodal_lower_bound(n, d, l)?;
            binned.row(&[
                &b,
                &l,
                &count,
                &(sum / count as f64 / n as f64),
                &(bound / n as f64),
                &(below as f64 / count as f64),
            ]);
        }
        let summary = CountSummary {
            n,
            d,
            ensemble: cfg.graph.ensemble,
            graphs,
        };
        Ok(vec![
            curve.finish("nodal_count.csv"),
            binned.finish("nodal_count_binned.csv"),
            json(ctx.header, "nodal_count_summary.json", &summary),
        ])
    })
}

/// Per-eigenvector domain data gathered for the bin averages.
struct VectorStats {
    lambda: f64,
    valency: Vec<u64>,
    p_e: f64,
    /// `ν_k` for `k = 1..=kmax`.
    nu: Vec<u64>,
}

fn vector_stats(ctx: &Context, task: Task) -> Result<Vec<VectorStats>, RunError> {
    let g = ctx.graph(task)?;
    let s = ctx.spectrum(&g)?;
    let kmax = ctx.cfg.nodal.kmax;
    (1..s.n())
        .map(|i| {
            let ng = induce_nodal(&g, s.vector(i), ctx.nodal_options())?;
            let st = ng.statistics();
            Ok(VectorStats {
                lambda: s.eigenvalues()[i],
                valency: st.valency.clone(),
                p_e: ng.p_e(),
                nu: (1..=kmax).map(|k| st.nu(k)).collect(),
            })
        })
        .collect()
}

/// Eigenvectors of all graphs grouped by eigenvalue bin; bins below the
/// minimum count are dropped.
fn binned_vectors(
    ctx: &Context,
    stages: &mut Stages,
) -> Result<Vec<(usize, f64, Vec<VectorStats>)>, RunError> {
    let results = stages.time("graphs", || ctx.map_tasks(|t| vector_stats(ctx, t)))?;
    let bins = LambdaBins::kesten_mckay(ctx.cfg.graph.d, ctx.cfg.nodal.bins);
    let mut grouped: Vec<Vec<VectorStats>> = (0..bins.count).map(|_| Vec::new()).collect();
    for v in results.into_iter().flatten() {
        if let Some(b) = bins.bin_of(v.lambda) {
            grouped[b].push(v);
        }
    }
    Ok(grouped
        .into_iter()
        .enumerate()
        .filter(|(_, vs)| vs.len() >= ctx.cfg.nodal.min_bin_count)
        .map(|(b, vs)| (b, bins.center(b), vs))
        .collect())
}

#[derive(Serialize)]
struct BinSummary {
    bin: usize,
    lambda: f64,
    eigenvectors: usize,
    /// Largest `|empirical - model|` over `j`, in units of the standard
    /// error of a frequency over `eigenvectors * n` draws from the model.
    max_gaussian_gap_se: f64,
    max_binomial_gap_se: f64,
}

#[derive(Serialize)]
struct ValencySummary {
    n: usize,
    d: usize,
    ensemble: usize,
    bins: Vec<BinSummary>,
}

/// Standard error of a frequency of `total` independent draws with
/// probability `q`. Vertices of one eigenvector are not independent, so this
/// understates the spread; it is only a scale for the summary.
fn model_se(q: f64, total: f64) -> f64 {
    (q * (1.0 - q) / total).sqrt().max(f64::EPSILON)
}

pub(super) fn valency(ctx: &Context, stages: &mut Stages) -> Result<Vec<OutputFile>, RunError> {
    let cfg = ctx.cfg;
    let (n, d) = (cfg.graph.n, cfg.graph.d);
    let bins = binned_vectors(ctx, stages)?;
    let opts = ctx.mvn_options();
    let predictions = stages.time("gaussian", || {
        ctx.pool.install(|| {
            bins.par_iter()
                .map(|(_, l, _)| p_j_gaussian_all(*l, d, opts))
                .collect::<Result<Vec<_>, _>>()
        })
    })?;

    stages.time("assemble", || {
        let mut valency = Csv::new(
            ctx.header,
            &[
                "bin",
                "lambda",
                "eigenvectors",
                "j",
                "empirical",
                "gaussian",
                "gaussian_se",
                "binomial",
            ],
        );
        let mut pe = Csv::new(
            ctx.header,
            &[
                "bin",
                "lambda",
                "eigenvectors",
                "p_e_empirical",
                "p_e_gaussian",
            ],
        );
        let mut summaries = Vec::new();
        for ((b, l, vs), pred) in bins.iter().zip(&predictions) {
            let m = vs.len();
            let total = (m * n) as f64;
            let pe_gauss = p_e_gaussian(*l, d)?;
            let (mut gap_g, mut gap_b) = (0.0f64, 0.0f64);
            for (j, g) in pred.iter().enumerate() {
                let emp = vs.iter().map(|v| v.valency[j]).sum::<u64>() as f64 / total;
                let binom = p_j_percolation(pe_gauss, d, j)?;
                valency.row(&[b, l, &m, &j, &emp, &g.value, &g.std_error, &binom]);
                gap_g = gap_g.max((emp - g.value).abs() / model_se(g.value, total));
                gap_b = gap_b.max((emp - binom).abs() / model_se(binom, total));
            }
            let pe_emp = vs.iter().map(|v| v.p_e).sum::<f64>() / m as f64;
            pe.row(&[b, l, &m, &pe_emp, &pe_gauss]);
            summaries.push(BinSummary {
                bin: *b,
                lambda: *l,
                eigenvectors: m,
                max_gaussian_gap_se: gap_g,
                max_binomial_gap_se: gap_b,
            });
        }
        let summary = ValencySummary {
            n,
            d,
            ensemble: cfg.graph.ensemble,
            bins: summaries,
        };
        Ok(vec![
            valency.finish("valency.csv"),
            pe.finish("p_e.csv"),
            json(ctx.header, "valency_summary.json", &summary),
        ])
    })
}

#[derive(Serialize)]
struct SmallDomainBin {
    bin: usize,
    lambda: f64,
    eigenvectors: usize,
    /// Empirical and predicted `ν_k / n` for `k = 1..=kmax`.
    empirical: Vec<f64>,
    predicted: Vec<f64>,
}

#[derive(Serialize)]
struct SmallDomainSummary {
    n: usize,
    d: usize,
    ensemble: usize,
    kmax: usize,
    bins: Vec<SmallDomainBin>,
}

pub(super) fn small_domains(
    ctx: &Context,
    stages: &mut Stages,
) -> Result<Vec<OutputFile>, RunError> {
    let cfg = ctx.cfg;
    let (n, d, kmax) = (cfg.graph.n, cfg.graph.d, cfg.nodal.kmax);
    let bins = binned_vectors(ctx, stages)?;
    let opts = ctx.mvn_options();
    let predictions = stages.time("trees", || {
        ctx.pool.install(|| {
            bins.par_iter()
                .map(|(_, l, _)| expected_small_domains(*l, d, n, kmax, opts))
                .collect::<Result<Vec<_>, _>>()
        })
    })?;

    stages.time("assemble", || {
        let mut csv = Csv::new(
            ctx.header,
            &[
                "bin",
                "lambda",
                "eigenvectors",
                "k",
                "empirical_per_n",
                "predicted_per_n",
                "predicted_se_per_n",
            ],
        );
        let nf = n as f64;
        let mut out = Vec::new();
        for ((b, l, vs), pred) in bins.iter().zip(&predictions) {
            let m = vs.len();
            let mut empirical = Vec::with_capacity(kmax);
            for (k, p) in (1..=kmax).zip(pred) {
                let emp = vs.iter().map(|v| v.nu[k - 1]).sum::<u64>() as f64 / (m as f64 * nf);
                csv.row(&[b, l, &m, &k, &emp, &(p.value / nf), &(p.std_error / nf)]);
                empirical.push(emp);
            }
            out.push(SmallDomainBin {
                bin: *b,
                lambda: *l,
                eigenvectors: m,
                empirical,
                predicted: pred.iter().map(|p| p.value / nf).collect(),
            });
        }
        let summary = SmallDomainSummary {
            n,
            d,
            ensemble: cfg.graph.ensemble,
            kmax,
            bins: out,
        };
        Ok(vec![
            csv.finish("small_domains.csv"),
            json(ctx.header, "small_domains_summary.json", &summary),
        ])
    })
}

#[derive(Serialize)]
struct PercolationSummary {
    n: usize,
    d: usize,
    ensemble: usize,
    giant_threshold: f64,
    /// `1 / (d - 1)`, the bond percolation threshold of the `d`-regular tree.
    p_c_tree: f64,
    p_crossing: Option<f64>,
    lambda_crossing: Option<f64>,
    /// `p_e` of the Gaussian model at `lambda_crossing`.
    p_e_at_lambda_crossing: Option<f64>,
}

/// Sample-weighted average of the sweeps of all graphs.
fn pool_points(sweeps: &[Vec<GiantPoint>]) -> Vec<GiantPoint> {
    (0..sweeps[0].len())
        .map(|i| {
            let (mut l, mut s, mut w) = (0.0, 0.0, 0usize);
            for sweep in sweeps {
                let p = &sweep[i];
                l += p.largest_frac * p.seeds as f64;
                s += p.second_frac * p.seeds as f64;
                w += p.seeds;
            }
            let div = w.max(1) as f64;
            GiantPoint {
                grid: sweeps[0][i].grid,
                largest_frac: l / div,
                second_frac: s / div,
                seeds: w,
            }
        })
        .collect()
}

pub(super) fn percolation(ctx: &Context, stages: &mut Stages) -> Result<Vec<OutputFile>, RunError> {
    let cfg = ctx.cfg;
    let (n, d) = (cfg.graph.n, cfg.graph.d);
    let pc = &cfg.percolation;
    let p_grid = linspace(pc.p_min, pc.p_max, pc.p_points);
    let edge = spectral_edge(d);
    let l_grid = linspace(-edge, edge, pc.lambda_points);
    let results = stages.time("graphs", || {
        ctx.map_tasks(|task| {
            let g = ctx.graph(task)?;
            let seeds: Vec<u64> = (0..pc.seeds as u64)
                .map(|i| derive_seed(task.seed, "percolation", i))
                .collect();
            let perc = percolation_scan(&g, &p_grid, &seeds)?;
            let s = ctx.spectrum(&g)?;
            let nodal = nodal_scan(&g, &s, &l_grid, pc.half_width, ctx.nodal_options())?;
            Ok((perc, nodal))
        })
    })?;

    stages.time("assemble", || {
        let (perc, nodal): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        let perc = pool_points(&perc);
        let nodal = pool_points(&nodal);
        let mut pcsv = Csv::new(ctx.header, &["p", "largest_frac", "second_frac", "samples"]);
        for p in &perc {
            pcsv.row(&[&p.grid, &p.largest_frac, &p.second_frac, &p.seeds]);
        }
        let mut ncsv = Csv::new(
            ctx.header,
            &[
                "lambda",
                "p_e_gaussian",
                "largest_frac",
                "second_frac",
                "eigenvectors",
            ],
        );
        for p in &nodal {
            let pe = p_e_gaussian(p.grid, d)?;
            ncsv.row(&[&p.grid, &pe, &p.largest_frac, &p.second_frac, &p.seeds]);
        }
        let lambda_crossing = threshold_crossing(&nodal, GIANT_THRESHOLD);
        let summary = PercolationSummary {
            n,
            d,
            ensemble: cfg.graph.ensemble,
            giant_threshold: GIANT_THRESHOLD,
            p_c_tree: 1.0 / (d as f64 - 1.0),
            p_crossing: threshold_crossing(&perc, GIANT_THRESHOLD),
            lambda_crossing,
            p_e_at_lambda_crossing: lambda_crossing.map(|l| p_e_gaussian(l, d)).transpose()?,
        };
        Ok(vec![
            pcsv.finish("percolation.csv"),
            ncsv.finish("nodal_giant.csv"),
            json(ctx.header, "percolation_summary.json", &summary),
        ])
    })
}
