use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::NodalError;
use crate::linalg::pivoted_cholesky;
use crate::spectral::spectral_edge;
use crate::stats::{
    limiting_covariance, mvn_orthant, star_distance_matrix, MvnEstimate, MvnOptions,
};

/// Probability that an edge joins same-sign vertices,
/// `1/2 + arcsin(λ/d)/π`.
pub fn p_e_gaussian(lambda: f64, d: usize) -> Result<f64, NodalError> {
    let df = d as f64;
    if lambda.abs() > df {
        return Err(NodalError::OutsideRange { lambda, limit: df });
    }
    Ok(0.5 + (lambda / df).asin() / std::f64::consts::PI)
}

/// `max{2, n (1 - (d/2) p_e(λ))}`.
pub fn nodal_lower_bound(n: usize, d: usize, lambda: f64) -> Result<f64, NodalError> {
    let pe = p_e_gaussian(lambda, d)?;
    Ok((n as f64 * (1.0 - d as f64 / 2.0 * pe)).max(2.0))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Orthant options for one `p_j(λ)`: the error target applies to `p_j`
/// after scaling by `factor`, and every `(λ, j)` gets its own lattice shifts
/// so that errors of different evaluations are independent (`p_j(λ)` and
/// `p_{d-j}(-λ)` would otherwise share shifts on mirrored integrands).
fn scaled_opts(opts: MvnOptions, factor: f64, lambda: f64, j: usize) -> MvnOptions {
    MvnOptions {
        target_se: opts.target_se / factor,
        seed: splitmix(opts.seed ^ splitmix(lambda.to_bits() ^ splitmix(j as u64))),
        ..opts
    }
}

fn check_pj_args(lambda: f64, d: usize, j: usize) -> Result<(), NodalError> {
    if j > d {
        return Err(NodalError::Valency { j, d });
    }
    let edge = spectral_edge(d);
    if lambda.abs() >= edge {
        return Err(NodalError::OutsideRange {
            lambda,
            limit: edge,
        });
    }
    Ok(())
}

/// Probability that a vertex has exactly `j` same-sign neighbors under the
/// limiting star law, `2 C(d, j) P(f_0 > 0, f_1..f_j > 0, f_{j+1}..f_d < 0)`.
///
/// The star constraint `λ f_0 = Σ f_i` is eliminated exactly: for `λ ≠ 0`
/// the event `f_0 > 0` becomes `sign(λ) Σ f_i > 0` on the neighbor block; at
/// `λ = 0`, `f_0` is independent of the neighbors, which satisfy `Σ f_i = 0`.
pub fn p_j_gaussian(
    lambda: f64,
    d: usize,
    j: usize,
    opts: MvnOptions,
) -> Result<MvnEstimate, NodalError> {
    check_pj_args(lambda, d, j)?;
    let reduced = limiting_covariance(star_distance_matrix(d), lambda, d)
        .expect("stars are tree configurations")
        .reduce_star()
        .expect("built as a star");
    let b = &reduced.neighbor_block;
    let signs: Vec<bool> = (0..d).map(|i| i < j).collect();
    let factor = 2.0 * binomial(d, j);
    let est = if lambda == 0.0 {
        let e = mvn_orthant(b, d, &signs, scaled_opts(opts, 0.5 * factor, lambda, j))?;
        MvnEstimate {
            value: 0.5 * e.value,
            std_error: 0.5 * e.std_error,
            ..e
        }
    } else {
        // (f_1, …, f_d, s Σ f_i)
        let s = lambda.signum();
        let m = d + 1;
        let mut sigma = vec![0.0; m * m];
        let mut total = 0.0;
        for r in 0..d {
            let mut row = 0.0;
            for c in 0..d {
                sigma[r * m + c] = b[r * d + c];
                row += b[r * d + c];
            }
            sigma[r * m + d] = s * row;
            sigma[d * m + r] = s * row;
            total += row;
        }
        sigma[d * m + d] = total;
        let mut signs = signs;
        signs.push(true);
        mvn_orthant(&sigma, m, &signs, scaled_opts(opts, factor, lambda, j))?
    };
    Ok(MvnEstimate {
        value: factor * est.value,
        std_error: factor * est.std_error,
        ..est
    })
}

/// `p_j` for every `j = 0..=d`.
pub fn p_j_gaussian_all(
    lambda: f64,
    d: usize,
    opts: MvnOptions,
) -> Result<Vec<MvnEstimate>, NodalError> {
    (0..=d).map(|j| p_j_gaussian(lambda, d, j, opts)).collect()
}

/// Same probability from the unreduced `(d+1)`-dimensional star covariance
/// (rank `d`), integrated directly on its pivoted factor.
pub fn p_j_gaussian_full(
    lambda: f64,
    d: usize,
    j: usize,
    opts: MvnOptions,
) -> Result<MvnEstimate, NodalError> {
    check_pj_args(lambda, d, j)?;
    let c = limiting_covariance(star_distance_matrix(d), lambda, d)
        .expect("stars are tree configurations");
    let signs: Vec<bool> = (0..=d).map(|i| i <= j).collect();
    let factor = 2.0 * binomial(d, j);
    let e = mvn_orthant(
        c.matrix(),
        d + 1,
        &signs,
        scaled_opts(opts, factor, lambda, j),
    )?;
    Ok(MvnEstimate {
        value: factor * e.value,
        std_error: factor * e.std_error,
        ..e
    })
}

/// Monte-Carlo frequencies of the valency `j = 0..=d` of the center of a
/// star drawn from the limiting law.
pub fn p_j_monte_carlo(
    lambda: f64,
    d: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, NodalError> {
    check_pj_args(lambda, d, 0)?;
    let c = limiting_covariance(star_distance_matrix(d), lambda, d)
        .expect("stars are tree configurations");
    let m = d + 1;
    let chol = pivoted_cholesky(c.matrix(), m, 1e-12).map_err(crate::stats::MvnError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; d + 1];
    let mut z = vec![0.0; chol.rank];
    let mut x = vec![0.0; m];
    for _ in 0..samples {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for r in 0..m {
            x[chol.perm[r]] = (0..chol.rank).map(|k| chol.at(r, k) * z[k]).sum();
        }
        let same = x[1..]
            .iter()
            .filter(|&&v| (v > 0.0) == (x[0] > 0.0))
            .count();
        counts[same] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / samples as f64).collect())
}
