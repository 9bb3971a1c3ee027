use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use speclab_core::covariance::tree_cov_closed;
use speclab_core::graph::DistanceMatrix;
use speclab_core::seeding::derive_seed;
use speclab_core::stats::{
    bivariate_cdf_deviation, hypothesis_one_univariate, hypothesis_two_univariate, kolmogorov_cdf,
    kolmogorov_dominance, limiting_covariance, normal_cdf, EmpiricalCdf, KsRecord,
};

use super::{linspace, Context, Task};
use crate::output::{json, Blank, Csv, OutputFile};
use crate::{RunError, Stages};

/// Upper end of the Kolmogorov comparison curve.
const CURVE_MAX: f64 = 2.5;

/// Half-width of the 95% Dvoretzky–Kiefer–Wolfowitz band for `n` samples.
fn dkw_band(n: usize) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * n as f64)).sqrt()
}

/// One ensemble sample: a component of the eigenvector nearest to `λ0`.
#[derive(Debug, Clone, Copy)]
struct Draw {
    index: usize,
    lambda: f64,
    vertex: usize,
    value: f64,
}

struct UnivariateTask {
    task: Task,
    /// `(distance, scaled, p_value)` per vertex.
    per_vertex: Vec<(f64, f64, f64)>,
    draws: Vec<Draw>,
}

#[derive(Serialize)]
struct DominanceSummary {
    excess: f64,
    critical: f64,
    holds: bool,
}

#[derive(Serialize)]
struct HypothesisOneGraph {
    graph: usize,
    seed: u64,
    max_scaled_ks: f64,
    dominance: DominanceSummary,
    records: Vec<KsRecord>,
}

#[derive(Serialize)]
struct HypothesisTwoTarget {
    lambda0: f64,
    /// Largest `|λ - λ0|` among the eigenvectors used.
    max_lambda_offset: f64,
    dkw_band: f64,
    record: KsRecord,
}

#[derive(Serialize)]
struct UnivariateReport {
    n: usize,
    d: usize,
    ensemble: usize,
    hypothesis_one: Vec<HypothesisOneGraph>,
    hypothesis_two: Vec<HypothesisTwoTarget>,
}

/// Random vertex and random overall sign: the stored sign convention would
/// otherwise bias low-numbered vertices.
fn draw(
    ctx: &Context,
    s: &speclab_core::spectral::Spectrum,
    task: Task,
    j: usize,
    l0: f64,
) -> Draw {
    let (index, lambda, f) = s.nearest_eigenpair(l0, &ctx.tolerances());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(task.seed, "hypothesis-two", j as u64));
    let vertex = rng.random_range(0..f.len());
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    Draw {
        index,
        lambda,
        vertex,
        value: sign * f[vertex],
    }
}

pub(super) fn univariate(ctx: &Context, stages: &mut Stages) -> Result<Vec<OutputFile>, RunError> {
    let cfg = ctx.cfg;
    let (n, d) = (cfg.graph.n, cfg.graph.d);
    let targets = &cfg.gaussian.lambda0;
    let results = stages.time("graphs", || {
        ctx.map_tasks(|task| {
            let g = ctx.graph(task)?;
            let s = ctx.spectrum(&g)?;
            let per_vertex =
                hypothesis_one_univariate(&s, derive_seed(task.seed, "hypothesis-one", 0))?
                    .iter()
                    .map(|k| (k.distance, k.scaled, k.p_value))
                    .collect();
            let draws = targets
                .iter()
                .enumerate()
                .map(|(j, &l0)| draw(ctx, &s, task, j, l0))
                .collect();
            Ok(UnivariateTask {
                task,
                per_vertex,
                draws,
            })
        })
    })?;

    stages.time("assemble", || {
        let mut files = Vec::new();
        let curve_y = linspace(0.0, CURVE_MAX, cfg.gaussian.curve_points);
        let mut curve = Csv::new(ctx.header, &["graph", "y", "kolmogorov", "empirical"]);
        let mut hypothesis_one = Vec::new();
        for r in &results {
            let scaled: Vec<f64> = r.per_vertex.iter().map(|v| v.1).collect();
            let ecdf = EmpiricalCdf::new(&scaled);
            for &y in &curve_y {
                curve.row(&[&r.task.index, &y, &kolmogorov_cdf(y), &ecdf.eval(y)]);
            }
            let dom = kolmogorov_dominance(&scaled);
            hypothesis_one.push(HypothesisOneGraph {
                graph: r.task.index,
                seed: r.task.seed,
                max_scaled_ks: scaled.iter().copied().fold(0.0, f64::max),
                dominance: DominanceSummary {
                    excess: dom.excess,
                    critical: dom.critical,
                    holds: dom.holds,
                },
                records: r
                    .per_vertex
                    .iter()
                    .map(|&(distance, scaled, p_value)| KsRecord {
                        hypothesis: "I".into(),
                        lambda0: None,
                        n,
                        d,
                        ensemble_size: n - 1,
                        ks_distance: distance,
                        scaled_ks: scaled,
                        p_value,
                        seed: r.task.seed,
                    })
                    .collect(),
            });
        }
        files.push(curve.finish("kolmogorov_curve.csv"));

        let mut samples = Csv::new(
            ctx.header,
            &["lambda0", "graph", "index", "lambda", "vertex", "value"],
        );
        let mut cdf = Csv::new(
            ctx.header,
            &["lambda0", "x", "empirical", "normal", "deviation"],
        );
        let mut hypothesis_two = Vec::new();
        for (j, &l0) in targets.iter().enumerate() {
            let draws: Vec<Draw> = results.iter().map(|r| r.draws[j]).collect();
            for (r, dr) in results.iter().zip(&draws) {
                samples.row(&[
                    &l0,
                    &r.task.index,
                    &dr.index,
                    &dr.lambda,
                    &dr.vertex,
                    &dr.value,
                ]);
            }
            let values: Vec<f64> = draws.iter().map(|dr| dr.value).collect();
            let ks = hypothesis_two_univariate(&values)?;
            let ecdf = EmpiricalCdf::new(&values);
            for &x in &cfg.gaussian.grid {
                let (e, p) = (ecdf.eval(x), normal_cdf(x));
                cdf.row(&[&l0, &x, &e, &p, &(e - p)]);
            }
            hypothesis_two.push(HypothesisTwoTarget {
                lambda0: l0,
                max_lambda_offset: draws
                    .iter()
                    .map(|dr| (dr.lambda - l0).abs())
                    .fold(0.0, f64::max),
                dkw_band: dkw_band(values.len()),
                record: KsRecord {
                    hypothesis: "II".into(),
                    lambda0: Some(l0),
                    n,
                    d,
                    ensemble_size: values.len(),
                    ks_distance: ks.distance,
                    scaled_ks: ks.scaled,
                    p_value: ks.p_value,
                    seed: cfg.seed,
                },
            });
        }
        if !targets.is_empty() {
            files.push(samples.finish("hypothesis_two_samples.csv"));
            files.push(cdf.finish("hypothesis_two_cdf.csv"));
        }
        let report = UnivariateReport {
            n,
            d,
            ensemble: cfg.graph.ensemble,
            hypothesis_one,
            hypothesis_two,
        };
        files.push(json(ctx.header, "ks_report.json", &report));
        Ok(files)
    })
}

/// A pair of components at the configured distance, with a common random
/// sign.
#[derive(Debug, Clone, Copy)]
struct PairDraw {
    index: usize,
    lambda: f64,
    u: usize,
    v: usize,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct BivariateTarget {
    lambda0: f64,
    k: u32,
    samples: usize,
    cov_tree: f64,
    cov_sample: Option<f64>,
    max_cdf_deviation: Option<f64>,
    reference_std_error: Option<f64>,
    dkw_band: Option<f64>,
}

#[derive(Serialize)]
struct BivariateReport {
    n: usize,
    d: usize,
    ensemble: usize,
    targets: Vec<BivariateTarget>,
}

/// Random vertex pairs at distance `k`, one per eigenvector in the window
/// around `λ0` (the nearest eigenvector when the window is empty).
fn pair_draws(
    ctx: &Context,
    g: &speclab_core::graph::RegularGraph,
    s: &speclab_core::spectral::Spectrum,
    task: Task,
    j: usize,
    l0: f64,
) -> Vec<PairDraw> {
    let gs = &ctx.cfg.gaussian;
    let k = gs.pair_distance;
    let mut members = s.window(l0 - gs.half_width, l0 + gs.half_width).members;
    if members.is_empty() {
        members.push(s.nearest(l0, &ctx.tolerances()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(task.seed, "bivariate", j as u64));
    let n = g.n();
    let mut out = Vec::new();
    for i in members {
        let f = s.vector(i);
        // a few tries in case the chosen vertex has nothing at distance k
        for _ in 0..8 {
            let u = rng.random_range(0..n);
            let at_k: Vec<usize> = g
                .bfs_distances(u)
                .iter()
                .enumerate()
                .filter(|&(_, &x)| x == k)
                .map(|(v, _)| v)
                .collect();
            if at_k.is_empty() {
                continue;
            }
            let v = at_k[rng.random_range(0..at_k.len())];
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            out.push(PairDraw {
                index: i,
                lambda: s.eigenvalues()[i],
                u,
                v,
                x: sign * f[u],
                y: sign * f[v],
            });
            break;
        }
    }
    out
}

pub(super) fn multivariate(
    ctx: &Context,
    stages: &mut Stages,
) -> Result<Vec<OutputFile>, RunError> {
    let cfg = ctx.cfg;
    let (n, d) = (cfg.graph.n, cfg.graph.d);
    let gs = &cfg.gaussian;
    let k = gs.pair_distance;
    let results = stages.time("graphs", || {
        ctx.map_tasks(|task| {
            let g = ctx.graph(task)?;
            let s = ctx.spectrum(&g)?;
            Ok(gs
                .lambda0
                .iter()
                .enumerate()
                .map(|(j, &l0)| pair_draws(ctx, &g, &s, task, j, l0))
                .collect::<Vec<_>>())
        })
    })?;

    let opts = ctx.mvn_options();
    let mut samples = Csv::new(
        ctx.header,
        &["lambda0", "graph", "index", "lambda", "u", "v", "x", "y"],
    );
    let mut table = Csv::new(
        ctx.header,
        &[
            "lambda0",
            "k",
            "samples",
            "cov_tree",
            "cov_sample",
            "max_cdf_deviation",
            "reference_std_error",
            "dkw_band",
            "status",
        ],
    );
    let mut targets = Vec::new();
    stages.time("bivariate", || -> Result<(), RunError> {
        for (j, &l0) in gs.lambda0.iter().enumerate() {
            let mut pairs = Vec::new();
            for (graph, per_target) in results.iter().enumerate() {
                for p in &per_target[j] {
                    samples.row(&[&l0, &graph, &p.index, &p.lambda, &p.u, &p.v, &p.x, &p.y]);
                    pairs.push((p.x, p.y));
                }
            }
            let cov_tree = tree_cov_closed(l0, k as usize, d);
            if pairs.is_empty() {
                table.row(&[
                    &l0,
                    &k,
                    &0,
                    &cov_tree,
                    &Blank,
                    &Blank,
                    &Blank,
                    &Blank,
                    &"no_pairs",
                ]);
                targets.push(BivariateTarget {
                    lambda0: l0,
                    k,
                    samples: 0,
                    cov_tree,
                    cov_sample: None,
                    max_cdf_deviation: None,
                    reference_std_error: None,
                    dkw_band: None,
                });
                continue;
            }
            let config = DistanceMatrix::from_raw(vec![0, 1], vec![0, k, k, 0])
                .map_err(|e| RunError::Numerical(e.to_string()))?;
            let cov = limiting_covariance(config, l0, d)?;
            let (dev, se) = bivariate_cdf_deviation(&pairs, &cov, &gs.grid, opts)?;
            let m = pairs.len();
            let cov_sample = pairs.iter().map(|(x, y)| x * y).sum::<f64>() / m as f64;
            let band = dkw_band(m);
            table.row(&[&l0, &k, &m, &cov_tree, &cov_sample, &dev, &se, &band, &"ok"]);
            targets.push(BivariateTarget {
                lambda0: l0,
                k,
                samples: m,
                cov_tree,
                cov_sample: Some(cov_sample),
                max_cdf_deviation: Some(dev),
                reference_std_error: Some(se),
                dkw_band: Some(band),
            });
        }
        Ok(())
    })?;
    let report = BivariateReport {
        n,
        d,
        ensemble: cfg.graph.ensemble,
        targets,
    };
    Ok(vec![
        samples.finish("bivariate_samples.csv"),
        table.finish("bivariate.csv"),
        json(ctx.header, "bivariate_report.json", &report),
    ])
}
