use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ks::{kolmogorov_cdf, ks_distance, normal_cdf, EmpiricalCdf, KsStatistic};
use super::limiting::LimitingCovariance;
use super::mvn::{mvn_box, MvnError, MvnOptions};
use crate::seeding::derive_seed;
use crate::spectral::Spectrum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypothesisError {
    #[error("ensemble of {size} is too small, need at least {min}")]
    TooSmall { size: usize, min: usize },
    #[error("bivariate test needs a two-vertex configuration, got {0}")]
    NotPair(usize),
    #[error(transparent)]
    Mvn(#[from] MvnError),
}

/// One line of a KS test report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsRecord {
    pub hypothesis: String,
    pub lambda0: Option<f64>,
    pub n: usize,
    pub d: usize,
    pub ensemble_size: usize,
    pub ks_distance: f64,
    pub scaled_ks: f64,
    pub p_value: f64,
    pub seed: u64,
}

/// Per-vertex KS statistics of `f^{(i)}_v` over the non-constant
/// eigenvectors `i = 1..n` against the standard normal.
///
/// Each eigenvector is multiplied by a random sign drawn from `seed`. The
/// stored vectors have their first non-negligible entry positive, which
/// would make the marginal at that vertex one-sided.
pub fn hypothesis_one_univariate(
    spectrum: &Spectrum,
    seed: u64,
) -> Result<Vec<KsStatistic>, HypothesisError> {
    let n = spectrum.n();
    if n < 2 {
        return Err(HypothesisError::TooSmall {
            size: n.saturating_sub(1),
            min: 1,
        });
    }
    let signs: Vec<f64> = (0..n)
        .map(|i| {
            if derive_seed(seed, "eigenvector-sign", i as u64) & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let t = spectrum.vertex_major();
    Ok((0..n)
        .map(|v| {
            let row: Vec<f64> = (1..n).map(|i| signs[i] * t[v * n + i]).collect();
            ks_distance(&EmpiricalCdf::new(&row), normal_cdf)
        })
        .collect())
}

/// KS statistic of a pooled ensemble sample, one value per graph, against
/// the standard normal.
pub fn hypothesis_two_univariate(samples: &[f64]) -> Result<KsStatistic, HypothesisError> {
    if samples.is_empty() {
        return Err(HypothesisError::TooSmall { size: 0, min: 1 });
    }
    Ok(ks_distance(&EmpiricalCdf::new(samples), normal_cdf))
}

/// One-sided comparison of a sample of scaled KS values with the
/// Kolmogorov law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dominance {
    /// `sup_y (K(y) - F(y))`: how far the sample cdf falls right of `K`.
    pub excess: f64,
    /// One-sided 5% critical value `1.2239 / sqrt(N)`.
    pub critical: f64,
    pub holds: bool,
}

/// Tests that the empirical cdf of `scaled` lies at or left of the
/// Kolmogorov cdf, i.e. the scaled distances are no larger than the limit
/// law predicts, at the 5% level.
pub fn kolmogorov_dominance(scaled: &[f64]) -> Dominance {
    let f = EmpiricalCdf::new(scaled);
    let s = f.sorted();
    let nf = s.len() as f64;
    // K - F is largest just before a jump of F
    let mut excess: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        excess = excess.max(kolmogorov_cdf(s[i]) - i as f64 / nf);
        let x = s[i];
        while i < s.len() && s[i] == x {
            i += 1;
        }
    }
    let critical = 1.2239 / nf.sqrt();
    Dominance {
        excess,
        critical,
        holds: excess <= critical,
    }
}

/// `max |F_emp(x, y) - Φ(x, y; C)|` over `grid × grid`, with the bivariate
/// normal cdf evaluated by [`mvn_box`]. Returns the maximal deviation and the
/// largest standard error among the reference values.
pub fn bivariate_cdf_deviation(
    pairs: &[(f64, f64)],
    cov: &LimitingCovariance,
    grid: &[f64],
    opts: MvnOptions,
) -> Result<(f64, f64), HypothesisError> {
    if cov.m() != 2 {
        return Err(HypothesisError::NotPair(cov.m()));
    }
    if pairs.is_empty() {
        return Err(HypothesisError::TooSmall { size: 0, min: 1 });
    }
    let nf = pairs.len() as f64;
    let mut worst: f64 = 0.0;
    let mut worst_se: f64 = 0.0;
    for &x in grid {
        for &y in grid {
            let reference = mvn_box(cov.matrix(), 2, &[f64::NEG_INFINITY; 2], &[x, y], opts)?;
            let emp = pairs.iter().filter(|&&(a, b)| a <= x && b <= y).count() as f64 / nf;
            worst = worst.max((emp - reference.value).abs());
            worst_se = worst_se.max(reference.std_error);
        }
    }
    Ok((worst, worst_se))
}
