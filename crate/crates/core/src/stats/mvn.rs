use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::ks::{normal_cdf, normal_quantile};
use crate::linalg::{pivoted_cholesky, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnOptions {
    /// Stop once the standard error is at or below this.
    pub target_se: f64,
    /// Independent random shifts of the lattice.
    pub shifts: usize,
    /// Lattice points per shift in the first round; doubled every round.
    pub initial_points: usize,
    /// Cap on lattice points per shift.
    pub max_points: usize,
    /// Relative pivot tolerance for the rank-revealing factorization.
    pub rank_tol: f64,
    pub seed: u64,
}

impl Default for MvnOptions {
    fn default() -> Self {
        MvnOptions {
            target_se: 1e-4,
            shifts: 12,
            initial_points: 128,
            max_points: 1 << 20,
            rank_tol: 1e-10,
            seed: 0x005e_ed0f_6e17,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Lattice points per shift used for the final estimate.
    pub points: usize,
    /// Numerical rank of the covariance.
    pub rank: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MvnError {
    #[error("covariance: {0}")]
    Covariance(#[from] LinalgError),
    #[error("bounds have length {got}, expected {m}")]
    Bounds { m: usize, got: usize },
    #[error("lower bound above upper bound in coordinate {0}")]
    EmptyBox(usize),
    #[error(
        "standard error {std_error:e} above target {target:e} after {points} points per shift"
    )]
    Precision {
        std_error: f64,
        target: f64,
        points: usize,
    },
}

/// One row of `x = L z` in pivot order.
struct Row {
    lower: f64,
    upper: f64,
    coeffs: Vec<f64>,
}

/// `P(lower < X < upper)` for `X ~ N(0, Σ)`, `Σ` positive semidefinite.
///
/// Genz's separation of variables on a pivoted Cholesky factor: each row of
/// `L` constrains the last variable it depends on, rows sharing that variable
/// intersect their intervals, and a row with no variable (zero variance) is
/// an indicator of `lower < 0 < upper`. The resulting integral over the unit
/// cube is estimated with a randomly shifted Richtmyer lattice plus
/// antithetic points, doubling the lattice until the standard error over the
/// shifts meets `opts.target_se`.
pub fn mvn_box(
    sigma: &[f64],
    m: usize,
    lower: &[f64],
    upper: &[f64],
    opts: MvnOptions,
) -> Result<MvnEstimate, MvnError> {
    if lower.len() != m || upper.len() != m {
        return Err(MvnError::Bounds {
            m,
            got: lower.len().min(upper.len()),
        });
    }
    if let Some(i) = (0..m).find(|&i| lower[i].is_nan() || upper[i].is_nan() || lower[i] > upper[i])
    {
        return Err(MvnError::EmptyBox(i));
    }
    let chol = pivoted_cholesky(sigma, m, opts.rank_tol)?;
    let rank = chol.rank;
    let exact = |value: f64| {
        Ok(MvnEstimate {
            value,
            std_error: 0.0,
            points: 0,
            rank,
        })
    };

    // Group rows by the last column they depend on.
    let mut groups: Vec<Vec<Row>> = (0..rank).map(|_| Vec::new()).collect();
    for r in 0..m {
        let orig = chol.perm[r];
        let coeffs: Vec<f64> = (0..rank).map(|c| chol.at(r, c)).collect();
        let norm = coeffs.iter().map(|x| x * x).sum::<f64>().sqrt();
        let pivot = (0..rank)
            .rev()
            .find(|&c| coeffs[c].abs() > 1e-10 * norm.max(1e-300));
        match pivot {
            None => {
                if !(lower[orig] < 0.0 && 0.0 < upper[orig]) {
                    return exact(0.0);
                }
            }
            Some(c) => groups[c].push(Row {
                lower: lower[orig],
                upper: upper[orig],
                coeffs,
            }),
        }
    }
    if rank == 0 {
        return exact(1.0);
    }

    let dim = rank - 1;
    let alphas: Vec<f64> = first_primes(dim)
        .into_iter()
        .map(|p| (p as f64).sqrt().fract())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shifts: Vec<Vec<f64>> = (0..opts.shifts.max(2))
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();

    let mut sums = vec![0.0; shifts.len()];
    let mut done = 0usize;
    let mut target = opts.initial_points.max(1);
    let mut u = vec![0.0; dim];
    let mut z = vec![0.0; rank];
    loop {
        for (s, shift) in shifts.iter().enumerate() {
            let mut acc = 0.0;
            for k in done..target {
                for c in 0..dim {
                    u[c] = (k as f64 * alphas[c] + shift[c]).fract();
                    // baker's transform
                    u[c] = 1.0 - (2.0 * u[c] - 1.0).abs();
                }
                acc += integrand(&groups, &u, &mut z, false);
                acc += integrand(&groups, &u, &mut z, true);
            }
            sums[s] += 0.5 * acc;
        }
        done = target;
        let means: Vec<f64> = sums.iter().map(|s| s / done as f64).collect();
        let ns = means.len() as f64;
        let value = means.iter().sum::<f64>() / ns;
        let var = means.iter().map(|x| (x - value).powi(2)).sum::<f64>() / (ns - 1.0);
        let std_error = (var / ns).sqrt();
        if std_error <= opts.target_se {
            return Ok(MvnEstimate {
                value: value.clamp(0.0, 1.0),
                std_error,
                points: done,
                rank,
            });
        }
        if done >= opts.max_points {
            return Err(MvnError::Precision {
                std_error,
                target: opts.target_se,
                points: done,
            });
        }
        target = (2 * done).min(opts.max_points);
    }
}

/// Product of conditional interval probabilities for one point of the cube.
fn integrand(groups: &[Vec<Row>], u: &[f64], z: &mut [f64], antithetic: bool) -> f64 {
    let mut weight = 1.0;
    for (c, rows) in groups.iter().enumerate() {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for row in rows {
            let s: f64 = row.coeffs[..c]
                .iter()
                .zip(&z[..c])
                .map(|(a, b)| a * b)
                .sum();
            let l = row.coeffs[c];
            let (a, b) = ((row.lower - s) / l, (row.upper - s) / l);
            let (a, b) = if l > 0.0 { (a, b) } else { (b, a) };
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return 0.0;
        }
        // Work in the upper tail when the interval sits right of zero.
        let upper_tail = lo > 0.0;
        let (pa, pb) = if upper_tail {
            (normal_cdf(-hi), normal_cdf(-lo))
        } else {
            (normal_cdf(lo), normal_cdf(hi))
        };
        let width = pb - pa;
        if width <= 0.0 {
            return 0.0;
        }
        weight *= width;
        if c + 1 < groups.len() {
            let w = if antithetic { 1.0 - u[c] } else { u[c] };
            let p = (pa + w * width).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
            let x = normal_quantile(p);
            z[c] = if upper_tail { -x } else { x };
        }
    }
    weight
}

/// Orthant probability `P(sign(X_i) = sign_i for all i)`; `true` is positive.
pub fn mvn_orthant(
    sigma: &[f64],
    m: usize,
    positive: &[bool],
    opts: MvnOptions,
) -> Result<MvnEstimate, MvnError> {
    if positive.len() != m {
        return Err(MvnError::Bounds {
            m,
            got: positive.len(),
        });
    }
    let lower: Vec<f64> = positive
        .iter()
        .map(|&p| if p { 0.0 } else { f64::NEG_INFINITY })
        .collect();
    let upper: Vec<f64> = positive
        .iter()
        .map(|&p| if p { f64::INFINITY } else { 0.0 })
        .collect();
    mvn_box(sigma, m, &lower, &upper, opts)
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| !c.is_multiple_of(p))
        {
            primes.push(c);
        }
        c += 1;
    }
    primes
}
