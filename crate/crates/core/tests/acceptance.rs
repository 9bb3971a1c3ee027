//! Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use statrs::distribution::{ContinuousCDF, StudentsT};

use speclab_core::covariance::{
    norm_deviation, orthogonality_check, tree_cov_closed, tree_cov_envelope, tree_cov_recursive,
    CovarianceTable,
};
use speclab_core::graph::{
    cycle_census, generate_regular, DistanceTable, GenerateOptions, RegularGraph,
    DEFAULT_CENSUS_BUDGET,
};
use speclab_core::nodal::{
    courant_bound, expected_small_domains, induce_nodal, nodal_scan, p_e_gaussian, p_j_gaussian,
    percolation_scan, structural_violations, threshold_crossing, DomainStatistics, LambdaBins,
    NodalError, NodalOptions, DEFAULT_BINS, GIANT_THRESHOLD, MIN_BIN_COUNT,
};
use speclab_core::seeding::derive_seed;
use speclab_core::spectral::{eigendecompose, spectral_edge, EigenOptions, Spectrum, Tolerances};
use speclab_core::stats::{
    hypothesis_one_univariate, kolmogorov_dominance, mvn_orthant, MvnOptions, KOLMOGOROV_Q99,
};

const MASTER_SEED: u64 = 20_240_601;

// Tolerances pinned from the criteria.
const C1_REL: f64 = 1e-10;
const C1_MAX_SECONDS: f64 = 1.0;
const C2_ABS: f64 = 1e-8;
const C2_MAX_SECONDS: f64 = 10.0;
const C3_SIGMAS: f64 = 3.0;
const C3_FAR_RATIO: f64 = 2.0;
const C4_BOUND: f64 = 1.0;
const C4_CALIBRATED: f64 = 0.3;
const C4_DEPTH: f64 = 0.6;
const C5_PASS_RATE: f64 = 0.95;
const C5_SIGN_SEED: u64 = 5;
const C6_SIGMAS: f64 = 3.0;
const C7_SIGMAS: f64 = 3.0;
const C7_RATE: f64 = 0.90;
const C8_SIGMAS: f64 = 3.0;
const C8_RATE: f64 = 0.85;
/// Family-wise level of the symmetry check; each cell is compared against a
/// Bonferroni t quantile because the 12-shift standard errors carry 11
/// degrees of freedom.
const C8_SYM_LEVEL: f64 = 0.01;
const MVN_DOF: f64 = 11.0;
const C9_GAP: f64 = 0.05;
const C9_LAMBDA_MAX: f64 = 1.0;
const C10_SIGMAS: f64 = 3.0;
const C10_RATE: f64 = 0.85;
const C10_KMAX: usize = 4;
const C11_PC_TOL: f64 = 0.05;
const C12_SEEDS: u64 = 20;
const C12_SIGMAS: f64 = 4.0;

struct Fixture {
    graph: RegularGraph,
    spectrum: Spectrum,
}

fn fixture(n: usize, d: usize) -> Fixture {
    let seed = derive_seed(MASTER_SEED, &format!("fixture-{n}-{d}"), 0);
    let opts = GenerateOptions {
        require_connected: true,
        ..Default::default()
    };
    let graph = generate_regular(n, d, seed, opts).expect("fixture graph");
    let spectrum = eigendecompose(&graph, EigenOptions::default()).expect("fixture spectrum");
    Fixture { graph, spectrum }
}

static G4000_3: OnceLock<Fixture> = OnceLock::new();
static G4000_6: OnceLock<Fixture> = OnceLock::new();
static G2000_4: OnceLock<Fixture> = OnceLock::new();

fn g4000_3() -> &'static Fixture {
    G4000_3.get_or_init(|| fixture(4000, 3))
}
fn g4000_6() -> &'static Fixture {
    G4000_6.get_or_init(|| fixture(4000, 6))
}
fn g2000_4() -> &'static Fixture {
    G2000_4.get_or_init(|| fixture(2000, 4))
}

/// Domain statistics of every eigenvector, `None` where a component is zero.
fn all_statistics(fx: &Fixture) -> Vec<Option<DomainStatistics>> {
    (0..fx.spectrum.n())
        .map(
            |i| match induce_nodal(&fx.graph, fx.spectrum.vector(i), NodalOptions::default()) {
                Ok(ng) => Some(ng.statistics()),
                Err(NodalError::ZeroComponent { .. }) => None,
                Err(e) => panic!("nodal graph: {e}"),
            },
        )
        .collect()
}

static STATS_4000_3: OnceLock<Vec<Option<DomainStatistics>>> = OnceLock::new();

fn stats_4000_3() -> &'static [Option<DomainStatistics>] {
    STATS_4000_3.get_or_init(|| all_statistics(g4000_3()))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn c1() -> Outcome {
    let t = Instant::now();
    let (mut worst, mut worst_raw) = (0.0f64, 0.0f64);
    for d in 3..=10 {
        let edge = spectral_edge(d);
        for k in 0..=50 {
            let env = tree_cov_envelope(k, d);
            for i in 0..=100 {
                let l = -edge + 2.0 * edge * i as f64 / 100.0;
                let (a, b) = (tree_cov_closed(l, k, d), tree_cov_recursive(l, k, d));
                let diff = (a - b).abs();
                worst = worst.max(diff / a.abs().max(b.abs()).max(env));
                if a.abs().max(b.abs()) > 0.0 {
                    worst_raw = worst_raw.max(diff / a.abs().max(b.abs()));
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= C1_REL && secs < C1_MAX_SECONDS,
        detail: format!(
            "max rel err {worst:.2e} (envelope-floored; unfloored {worst_raw:.2e}) over d 3..10, k <= 50, 101 points, {secs:.3} s"
        ),
    }
}

fn c2() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for d in [3, 4, 6] {
        for k in 0..=8 {
            for k2 in 0..=8 {
                let c = orthogonality_check(k, k2, d).expect("quadrature");
                worst = worst.max((c.value - c.target).abs());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= C2_ABS && secs < C2_MAX_SECONDS,
        detail: format!(
            "max |integral - target| {worst:.2e} for k,k' <= 8, d in {{3,4,6}}, {secs:.2} s"
        ),
    }
}

static COV_4000_3: OnceLock<(CovarianceTable, u32)> = OnceLock::new();
static COV_2000_4: OnceLock<(CovarianceTable, u32)> = OnceLock::new();

/// Covariances at every distance up to the diameter, and the diameter.
fn covariances(
    cell: &'static OnceLock<(CovarianceTable, u32)>,
    fx: &Fixture,
) -> &'static (CovarianceTable, u32) {
    cell.get_or_init(|| {
        let table = DistanceTable::compute(&fx.graph).expect("distances");
        let diam = table.diameter();
        (
            CovarianceTable::compute(&fx.spectrum, &table, diam as usize),
            diam,
        )
    })
}

fn rms_deviation(table: &CovarianceTable, s: &Spectrum, k: usize) -> f64 {
    let n = s.n();
    let sum: f64 = (0..n)
        .map(|i| (table.get(i, k).unwrap() - tree_cov_closed(s.eigenvalues()[i], k, s.d())).powi(2))
        .sum();
    (sum / n as f64).sqrt()
}

fn c3() -> Outcome {
    let fx = g4000_3();
    let (table, _) = covariances(&COV_4000_3, fx);
    let (n, d) = (4000.0, 3.0f64);
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [4usize, 5, 6] {
        let rms = rms_deviation(table, &fx.spectrum, k);
        let limit = C3_SIGMAS / (d * (d - 1.0).powi(k as i32 - 1) * n).sqrt();
        pass &= rms <= limit;
        parts.push(format!("k={k} rms {rms:.2e} <= {limit:.2e}"));
    }
    let base = rms_deviation(table, &fx.spectrum, 4);
    for k in [11usize, 12] {
        let rms = rms_deviation(table, &fx.spectrum, k);
        pass &= rms >= C3_FAR_RATIO * base;
        parts.push(format!("k={k} rms {rms:.2e} ({:.1}x k=4)", rms / base));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn c4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, cell, fx) in [
        ("(2000,4)", &COV_2000_4, g2000_4()),
        ("(4000,3)", &COV_4000_3, g4000_3()),
    ] {
        let (table, diam) = covariances(cell, fx);
        let diam = *diam;
        let d = fx.graph.d();
        let log_n = (fx.spectrum.n() as f64).ln() / ((d - 1) as f64).ln();
        let (mut worst_all, mut worst_short) = (0.0f64, 0.0f64);
        for k in 1..=diam as usize {
            let nd = norm_deviation(table, &fx.spectrum, k).expect("pairs at k <= diameter");
            let delta = nd.delta.expect("non-zero norms").abs();
            worst_all = worst_all.max(delta);
            if k as f64 / log_n <= C4_DEPTH {
                worst_short = worst_short.max(delta);
            }
        }
        pass &= worst_all < C4_BOUND && worst_short < C4_CALIBRATED;
        parts.push(format!("{name} diam {diam}: max |dN| {worst_all:.3}, max |dN| at k/log n <= 0.6 {worst_short:.3}"));
    }
    Outcome {
        pass,
        detail: parts.join("; ") + " (0.3 is our calibration)",
    }
}

fn c5() -> Outcome {
    let fx = g4000_3();
    let ks = hypothesis_one_univariate(&fx.spectrum, C5_SIGN_SEED).expect("KS");
    let scaled: Vec<f64> = ks.iter().map(|k| k.scaled).collect();
    let below = scaled.iter().filter(|&&s| s < KOLMOGOROV_Q99).count() as f64 / scaled.len() as f64;
    let dom = kolmogorov_dominance(&scaled);
    Outcome {
        pass: below >= C5_PASS_RATE && dom.holds,
        detail: format!(
            "{:.1}% of vertices below {KOLMOGOROV_Q99}; one-sided excess over Kolmogorov law {:.4} vs critical {:.4}",
            100.0 * below,
            dom.excess,
            dom.critical
        ),
    }
}

fn c6() -> Outcome {
    let opts = MvnOptions::default();
    let mut pass = true;
    let mut worst_sig = 0.0f64;
    for rho in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let e = mvn_orthant(&[1.0, rho, rho, 1.0], 2, &[true, true], opts).expect("orthant");
        let exact = 0.25 + f64::asin(rho) / (2.0 * PI);
        let err = (e.value - exact).abs();
        // an exact zero standard error still has to match to rounding
        let ok = err <= C6_SIGMAS * e.std_error || err <= 1e-14;
        pass &= ok;
        if e.std_error > 0.0 {
            worst_sig = worst_sig.max(err / e.std_error);
        }
    }
    let mut worst_total = 0.0f64;
    for m in 1..=4usize {
        // equicorrelated plus a perturbation, positive definite
        let mut sigma = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                sigma[i * m + j] = if i == j {
                    1.0
                } else {
                    0.3 + 0.1 * ((i + 2 * j) % 3) as f64 * if i < j { 1.0 } else { 0.0 }
                };
            }
        }
        for i in 0..m {
            for j in 0..i {
                sigma[i * m + j] = sigma[j * m + i];
            }
        }
        let (mut total, mut var) = (0.0, 0.0);
        for pattern in 0..(1u32 << m) {
            let signs: Vec<bool> = (0..m).map(|i| pattern >> i & 1 == 1).collect();
            let e = mvn_orthant(&sigma, m, &signs, opts).expect("orthant");
            total += e.value;
            var += e.std_error * e.std_error;
        }
        let tol = m as f64 * C6_SIGMAS * var.sqrt() + 1e-12;
        pass &= (total - 1.0).abs() <= tol;
        worst_total = worst_total.max((total - 1.0).abs());
    }
    Outcome {
        pass,
        detail: format!("bivariate worst {worst_sig:.2} standard errors; sign-pattern totals off by at most {worst_total:.1e} for m <= 4"),
    }
}

fn c7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, fx) in [(3usize, g4000_3()), (6, g4000_6())] {
        let bins = LambdaBins::kesten_mckay(d, DEFAULT_BINS);
        let edges = fx.graph.edges().len() as f64;
        let pe: Vec<Option<f64>> = (0..fx.spectrum.n())
            .map(|i| {
                induce_nodal(&fx.graph, fx.spectrum.vector(i), NodalOptions::default())
                    .ok()
                    .map(|ng| ng.p_e())
            })
            .collect();
        let (mut used, mut good) = (0, 0);
        for members in bins.assign(fx.spectrum.eigenvalues()) {
            let members: Vec<usize> = members.into_iter().filter(|&i| pe[i].is_some()).collect();
            if members.len() < MIN_BIN_COUNT {
                continue;
            }
            let c = members.len() as f64;
            let emp = members.iter().map(|&i| pe[i].unwrap()).sum::<f64>() / c;
            let pred = members
                .iter()
                .map(|&i| p_e_gaussian(fx.spectrum.eigenvalues()[i], d).unwrap())
                .sum::<f64>()
                / c;
            let se = (pred * (1.0 - pred) / (c * edges)).sqrt();
            used += 1;
            if (emp - pred).abs() <= C7_SIGMAS * se {
                good += 1;
            }
        }
        let rate = good as f64 / used as f64;
        pass &= rate >= C7_RATE;
        parts.push(format!("d={d}: {good}/{used} bins ({:.0}%)", 100.0 * rate));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn c8() -> Outcome {
    let fx = g4000_6();
    let d = 6;
    let n = fx.spectrum.n() as f64;
    let stats = all_statistics(fx);
    let bins = LambdaBins::kesten_mckay(d, DEFAULT_BINS);
    let opts = MvnOptions::default();
    let (mut cells, mut good) = (0, 0);
    // (gap, combined standard error) per cell
    let mut sym = Vec::new();
    for members in bins.assign(fx.spectrum.eigenvalues()) {
        let members: Vec<usize> = members
            .into_iter()
            .filter(|&i| stats[i].is_some())
            .collect();
        if members.len() < MIN_BIN_COUNT {
            continue;
        }
        let c = members.len() as f64;
        let lambda = members
            .iter()
            .map(|&i| fx.spectrum.eigenvalues()[i])
            .sum::<f64>()
            / c;
        for j in 0..=d {
            let emp = members
                .iter()
                .map(|&i| stats[i].as_ref().unwrap().valency[j] as f64 / n)
                .sum::<f64>()
                / c;
            let pred = p_j_gaussian(lambda, d, j, opts).expect("p_j");
            let mirror = p_j_gaussian(-lambda, d, d - j, opts).expect("p_j");
            sym.push((
                (pred.value - mirror.value).abs(),
                pred.std_error.hypot(mirror.std_error),
            ));
            let p = pred.value.clamp(0.0, 1.0);
            let se = (p * (1.0 - p) / (c * n)).sqrt().hypot(pred.std_error);
            cells += 1;
            if (emp - pred.value).abs() <= C8_SIGMAS * se {
                good += 1;
            }
        }
    }
    let rate = good as f64 / cells as f64;
    let t = StudentsT::new(0.0, 1.0, MVN_DOF).unwrap();
    let quantile = t.inverse_cdf(1.0 - C8_SYM_LEVEL / (2.0 * sym.len() as f64));
    let worst_gap = sym.iter().map(|&(g, _)| g).fold(0.0, f64::max);
    let worst_z = sym
        .iter()
        .map(|&(g, se)| if g == 0.0 { 0.0 } else { g / se })
        .fold(0.0, f64::max);
    let within3 = sym.iter().filter(|&&(g, se)| g <= 3.0 * se).count();
    let sym_ok = worst_z <= quantile;
    Outcome {
        pass: rate >= C8_RATE && sym_ok,
        detail: format!(
            "{good}/{cells} (bin, j) cells ({:.0}%); symmetry max gap {worst_gap:.1e}, max {worst_z:.2} SE vs t-Bonferroni {quantile:.2}, {within3}/{} within 3 SE",
            100.0 * rate,
            sym.len()
        ),
    }
}

fn c9() -> Outcome {
    let fx = g4000_3();
    let d = 3;
    let n = fx.spectrum.n() as f64;
    let stats = stats_4000_3();
    // (λ, ν, bound, |Ẽ|); the constant eigenvector has a single domain and
    // is not covered by the bound
    let curve: Vec<(f64, usize, f64, f64)> = (1..fx.spectrum.n())
        .filter_map(|i| {
            let l = fx.spectrum.eigenvalues()[i];
            let s = stats[i].as_ref()?;
            let bound =
                speclab_core::nodal::nodal_lower_bound(fx.spectrum.n(), d, l.clamp(-3.0, 3.0))
                    .unwrap();
            let same: u64 = s
                .valency
                .iter()
                .enumerate()
                .map(|(j, &c)| j as u64 * c)
                .sum();
            Some((l, s.count, bound, same as f64 / 2.0))
        })
        .collect();
    let skipped = fx.spectrum.n() - 1 - curve.len();
    let below = curve
        .iter()
        .filter(|&&(_, nu, b, _)| (nu as f64) < b)
        .count();
    // ν ≥ n - |Ẽ| holds for every sign vector; the bound replaces |Ẽ| by its
    // Gaussian expectation.
    let exact_violations = curve
        .iter()
        .filter(|&&(_, nu, _, e)| (nu as f64) < n - e)
        .count();
    let edges = n * d as f64 / 2.0;
    let (worst_z, worst_lambda) = curve
        .iter()
        .filter(|&&(_, nu, b, _)| (nu as f64) < b)
        .map(|&(l, nu, b, _)| {
            let pe = p_e_gaussian(l.clamp(-3.0, 3.0), d).unwrap();
            ((b - nu as f64) / (edges * pe * (1.0 - pe)).sqrt(), l)
        })
        .fold((0.0, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    let worst_gap = curve
        .iter()
        .filter(|&&(l, _, _, _)| l <= C9_LAMBDA_MAX)
        .map(|&(_, nu, b, _)| (nu as f64 - b).abs() / n)
        .fold(0.0, f64::max);
    // eigenvectors after the constant one, in order, while ν = 2
    let plateau = (1..fx.spectrum.n())
        .take_while(|&i| stats[i].as_ref().is_some_and(|s| s.count == 2))
        .count();
    Outcome {
        pass: below == 0 && worst_gap <= C9_GAP && plateau > 0,
        detail: format!(
            "{below} eigenvectors below the bound (worst by {worst_z:.1} binomial sd of |E~| at lambda {worst_lambda:.2}; nu >= n - |E~| fails for {exact_violations}); max |nu - bound|/n for lambda <= 1: {worst_gap:.4}; nu = 2 plateau of {plateau}; {skipped} skipped for zero components"
        ),
    }
}

fn c10() -> Outcome {
    let fx = g4000_3();
    let stats = stats_4000_3();
    let bins = LambdaBins::kesten_mckay(3, DEFAULT_BINS);
    let opts = MvnOptions::default();
    let edge = spectral_edge(3);
    let (mut used, mut good) = (0, 0);
    let mut worst = 0.0f64;
    for members in bins.assign(fx.spectrum.eigenvalues()) {
        let members: Vec<usize> = members
            .into_iter()
            .filter(|&i| stats[i].is_some())
            .collect();
        if members.len() < MIN_BIN_COUNT {
            continue;
        }
        let c = members.len() as f64;
        let lambda = (members
            .iter()
            .map(|&i| fx.spectrum.eigenvalues()[i])
            .sum::<f64>()
            / c)
            .clamp(-edge + 1e-9, edge - 1e-9);
        let pred = expected_small_domains(lambda, 3, fx.spectrum.n(), C10_KMAX, opts)
            .expect("small domains");
        let mut ok = true;
        for k in 1..=C10_KMAX {
            let measured = members
                .iter()
                .map(|&i| stats[i].as_ref().unwrap().nu(k) as f64)
                .sum::<f64>()
                / c;
            let tol = C10_SIGMAS * (measured + 1.0).sqrt();
            let gap = (measured - pred[k - 1].value).abs();
            worst = worst.max(gap / tol);
            ok &= gap <= tol;
        }
        used += 1;
        good += ok as usize;
    }
    let rate = good as f64 / used as f64;
    Outcome {
        pass: rate >= C10_RATE,
        detail: format!("{good}/{used} bins with all k <= 4 within 3 sqrt(measured+1) ({:.0}%); worst gap {worst:.2} tolerances", 100.0 * rate),
    }
}

fn c11() -> Outcome {
    let fx = g4000_3();
    let grid: Vec<f64> = (0..=40).map(|i| 0.30 + 0.01 * i as f64).collect();
    let seeds: Vec<u64> = (0..10)
        .map(|i| derive_seed(MASTER_SEED, "percolation", i))
        .collect();
    let perc = percolation_scan(&fx.graph, &grid, &seeds).expect("percolation");
    let pc = threshold_crossing(&perc, GIANT_THRESHOLD);
    let edge = spectral_edge(3);
    let lgrid: Vec<f64> = (0..=56)
        .map(|i| 0.05 * i as f64)
        .filter(|&l| l < edge)
        .collect();
    let nodal = nodal_scan(
        &fx.graph,
        &fx.spectrum,
        &lgrid,
        0.025,
        NodalOptions {
            policy: speclab_core::nodal::ZeroPolicy::Perturb,
            ..Default::default()
        },
    )
    .expect("nodal scan");
    let at_zero = nodal[0].largest_frac;
    let onset = threshold_crossing(&nodal, GIANT_THRESHOLD);
    let pc_ok = pc.is_some_and(|p| (p - 0.5).abs() <= C11_PC_TOL);
    let onset_ok = at_zero < GIANT_THRESHOLD && onset.is_some_and(|l| l > 0.0);
    let pe_c = onset.map(|l| p_e_gaussian(l, 3).unwrap());
    Outcome {
        pass: pc_ok && onset_ok && pe_c.is_some_and(|p| p > 0.5),
        detail: format!(
            "percolation threshold {}; nodal largest fraction at lambda=0 {at_zero:.4}; nodal onset lambda_c {} with p_e(lambda_c) {}",
            pc.map_or("none".into(), |p| format!("{p:.2}")),
            onset.map_or("none".into(), |l| format!("{l:.2}")),
            pe_c.map_or("n/a".into(), |p| format!("{p:.3} > 1/(d-1) = 0.5")),
        ),
    }
}

fn c12() -> Outcome {
    let tol = Tolerances::default();
    let mut violations = Vec::new();
    let (mut checked, mut skipped) = (0usize, 0usize);
    let mut census_parts = Vec::new();
    let mut census_ok = true;
    for d in [3usize, 4] {
        let mut counts = [Vec::new(), Vec::new()];
        for s in 0..C12_SEEDS {
            let seed = derive_seed(MASTER_SEED, &format!("structural-{d}"), s);
            let opts = GenerateOptions {
                require_connected: true,
                ..Default::default()
            };
            let g = generate_regular(500, d, seed, opts).expect("graph");
            let spec = eigendecompose(&g, EigenOptions::default()).expect("spectrum");
            for i in 0..spec.n() {
                match induce_nodal(&g, spec.vector(i), NodalOptions::default()) {
                    Ok(ng) => {
                        let v = structural_violations(
                            &ng.statistics(),
                            spec.eigenvalues()[i],
                            courant_bound(&spec, i, &tol),
                            d,
                        );
                        checked += 1;
                        violations
                            .extend(v.into_iter().map(|m| format!("d={d} seed {s} #{i}: {m}")));
                    }
                    Err(NodalError::ZeroComponent { .. }) => skipped += 1,
                    Err(e) => panic!("{e}"),
                }
            }
            let census = cycle_census(&g, 4, DEFAULT_CENSUS_BUDGET).expect("census");
            counts[0].push(census.count(3) as f64);
            counts[1].push(census.count(4) as f64);
        }
        for (idx, k) in [3usize, 4].into_iter().enumerate() {
            let xs = &counts[idx];
            let m = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / m;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
            let expect = speclab_core::graph::CycleCensus::poisson_mean(d, k);
            let se = (sd / m.sqrt()).max(1e-12);
            let z = (mean - expect) / se;
            census_ok &= z.abs() <= C12_SIGMAS;
            census_parts.push(format!(
                "d={d} k={k} mean {mean:.2} vs {expect:.2} ({z:+.2} se)"
            ));
        }
    }
    let first = violations.first().cloned().unwrap_or_default();
    Outcome {
        pass: violations.is_empty() && census_ok,
        detail: format!(
            "{checked} eigenvectors checked, {} violations{}; {skipped} skipped for zero components; census {}",
            violations.len(),
            if first.is_empty() { String::new() } else { format!(" (first: {first})") },
            census_parts.join(", ")
        ),
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("Chebyshev identity", c1),
        ("orthogonality", c2),
        ("empirical covariance (4000,3)", c3),
        ("norm deviation", c4),
        ("Gaussian univariate (4000,3)", c5),
        ("multinormal orthant", c6),
        ("edge probability p_e", c7),
        ("valency p_j (4000,6)", c8),
        ("nodal count vs bound (4000,3)", c9),
        ("small domains (4000,3)", c10),
        ("percolation contrast", c11),
        ("structural invariants", c12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        failed += !o.pass as usize;
        println!(
            "{} {:>2} {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
