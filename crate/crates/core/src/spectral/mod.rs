//! Adjacency spectra of regular graphs.

mod export;
mod kesten_mckay;
pub mod solver;

pub use export::{read_eigenvectors, read_spectrum_csv, write_eigenvectors, write_spectrum_csv};
pub(crate) use kesten_mckay::angular_density;
pub use kesten_mckay::{kesten_mckay_cdf, kesten_mckay_density, spectral_edge};

use thiserror::Error;

use crate::graph::RegularGraph;
use solver::{symmetric_eigen, symmetric_eigenvalues, SolverError, SolverOptions};

/// Largest `n` accepted by the dense solver unless overridden.
pub const DEFAULT_MAX_N: usize = 8000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Residual bound, relative to `d`.
    pub eig: f64,
    pub orth: f64,
    /// Bound on `|sum_j f_j|`, relative to `sqrt(n)`.
    pub sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig: 1e-9,
            orth: 1e-8,
            sum: 1e-6,
        }
    }
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("n = {n} exceeds the dense solver budget of {max}")]
    Budget { n: usize, max: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub max_n: usize,
    pub solver: SolverOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_n: DEFAULT_MAX_N,
            solver: SolverOptions::default(),
        }
    }
}

/// Eigenvalues `λ_1 ≥ … ≥ λ_n` of the adjacency matrix with eigenvectors
/// scaled so that `<f, f> = n` and whose first nonzero entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    d: usize,
    values: Vec<f64>,
    /// Row `i` is eigenvector `i`.
    vectors: Vec<f64>,
}

/// Entries below this magnitude do not fix an eigenvector's sign.
const SIGN_THRESHOLD: f64 = 1e-9;

impl Spectrum {
    /// Wraps precomputed eigenpairs, applying the scaling and sign rules.
    /// `vectors` holds one eigenvector per row, any nonzero norm.
    pub fn from_parts(
        d: usize,
        values: Vec<f64>,
        mut vectors: Vec<f64>,
    ) -> Result<Self, SpectralError> {
        let n = values.len();
        if vectors.len() != n * n {
            return Err(SpectralError::Format(format!(
                "{} vector entries for {n} eigenvalues",
                vectors.len()
            )));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(SpectralError::Format(
                "eigenvalues must be in descending order".into(),
            ));
        }
        let scale = (n as f64).sqrt();
        for row in vectors.chunks_exact_mut(n.max(1)) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(SpectralError::Format("zero eigenvector".into()));
            }
            let first = row
                .iter()
                .copied()
                .find(|x| x.abs() * scale / norm > SIGN_THRESHOLD)
                .unwrap_or(1.0);
            let s = scale / norm * first.signum();
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        Ok(Spectrum {
            n,
            d,
            values,
            vectors,
        })
    }

    /// Wraps eigenvectors that already follow the scaling and sign rules,
    /// keeping them bit for bit (for re-import of exported spectra).
    pub fn from_normalized(
        d: usize,
        values: Vec<f64>,
        vectors: Vec<f64>,
    ) -> Result<Self, SpectralError> {
        let n = values.len();
        if vectors.len() != n * n {
            return Err(SpectralError::Format(format!(
                "{} vector entries for {n} eigenvalues",
                vectors.len()
            )));
        }
        for (i, row) in vectors.chunks_exact(n.max(1)).enumerate() {
            let norm2: f64 = row.iter().map(|x| x * x).sum();
            if (norm2 / n as f64 - 1.0).abs() > 1e-8 {
                return Err(SpectralError::Format(format!(
                    "eigenvector {i} has <f,f> = {norm2}, expected {n}"
                )));
            }
        }
        Ok(Spectrum {
            n,
            d,
            values,
            vectors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `μ_i = d - λ_i`.
    pub fn laplacian_eigenvalues(&self) -> Vec<f64> {
        self.values.iter().map(|&l| self.d as f64 - l).collect()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    /// All eigenvectors, one per row.
    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    /// Transposed copy: row `v` holds `f^{(i)}_v` for every `i`.
    pub fn vertex_major(&self) -> Vec<f64> {
        let n = self.n;
        let mut t = vec![0.0; n * n];
        const TILE: usize = 32;
        for i0 in (0..n).step_by(TILE) {
            for v0 in (0..n).step_by(TILE) {
                for i in i0..(i0 + TILE).min(n) {
                    for v in v0..(v0 + TILE).min(n) {
                        t[v * n + i] = self.vectors[i * n + v];
                    }
                }
            }
        }
        t
    }

    /// Index of the eigenvalue closest to `target`. Values within
    /// `tol * d` of the best distance count as ties, resolved toward the
    /// smaller index.
    pub fn nearest(&self, target: f64, tol: &Tolerances) -> usize {
        let best = self
            .values
            .iter()
            .map(|l| (l - target).abs())
            .fold(f64::INFINITY, f64::min);
        let slack = tol.eig * self.d as f64;
        self.values
            .iter()
            .position(|l| (l - target).abs() <= best + slack)
            .expect("spectrum is not empty")
    }

    /// `(index, eigenvalue, eigenvector)` closest to `target`.
    pub fn nearest_eigenpair(&self, target: f64, tol: &Tolerances) -> (usize, f64, &[f64]) {
        let i = self.nearest(target, tol);
        (i, self.values[i], self.vector(i))
    }

    /// Indices with `lo ≤ λ_i ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> SpectralWindow {
        let members = (0..self.n)
            .filter(|&i| self.values[i] >= lo && self.values[i] <= hi)
            .collect();
        SpectralWindow { lo, hi, members }
    }

    /// Measures every invariant the spectrum is meant to satisfy.
    ///
    /// Residual and mean checks cost `O(n^2 d)`; orthogonality is checked on
    /// the pairs drawn from `orth_sample` (all pairs if it covers every index).
    pub fn check(&self, g: &RegularGraph, orth_sample: &[usize]) -> SpectrumCheck {
        let n = self.n;
        let mut residual: f64 = 0.0;
        let mut sum: f64 = 0.0;
        for i in 0..n {
            let f = self.vector(i);
            let l = self.values[i];
            for v in 0..n {
                let af: f64 = g.neighbors(v).iter().map(|&w| f[w as usize]).sum();
                residual = residual.max((af - l * f[v]).abs());
            }
            if i > 0 {
                sum = sum.max(f.iter().sum::<f64>().abs());
            }
        }
        let mut orth: f64 = 0.0;
        for (a, &i) in orth_sample.iter().enumerate() {
            for &j in &orth_sample[a..] {
                let dot: f64 = self
                    .vector(i)
                    .iter()
                    .zip(self.vector(j))
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                orth = orth.max((dot / n as f64 - target).abs());
            }
        }
        let top = self
            .values
            .first()
            .map_or(0.0, |l| (l - self.d as f64).abs());
        SpectrumCheck {
            max_residual: residual,
            max_orth_defect: orth,
            max_ground_overlap: sum,
            top_deviation: top,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumCheck {
    /// `max_i ||A f - λ f||_∞`
    pub max_residual: f64,
    /// `max |<f_i, f_j>/n - δ_ij|` over the sampled pairs
    pub max_orth_defect: f64,
    /// `max_{i>1} |Σ_j f_j|`
    pub max_ground_overlap: f64,
    /// `|λ_1 - d|`
    pub top_deviation: f64,
}

impl SpectrumCheck {
    /// Ground-state overlap is only meaningful for connected graphs.
    pub fn passes(&self, n: usize, d: usize, tol: &Tolerances, connected: bool) -> bool {
        let d = d as f64;
        self.max_residual <= tol.eig * d
            && self.max_orth_defect <= tol.orth
            && (!connected
                || (self.max_ground_overlap <= tol.sum * (n as f64).sqrt()
                    && self.top_deviation <= tol.eig * d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
    pub members: Vec<usize>,
}

impl SpectralWindow {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn eigendecompose(g: &RegularGraph, opts: EigenOptions) -> Result<Spectrum, SpectralError> {
    let n = g.n();
    if n > opts.max_n {
        return Err(SpectralError::Budget { n, max: opts.max_n });
    }
    let eig = symmetric_eigen(g.adjacency_matrix(), n, opts.solver)?;
    Spectrum::from_parts(g.d(), eig.values, eig.vectors)
}

/// Eigenvalues only, descending; far cheaper than [`eigendecompose`].
pub fn eigenvalues(g: &RegularGraph, opts: EigenOptions) -> Result<Vec<f64>, SpectralError> {
    let n = g.n();
    if n > opts.max_n {
        return Err(SpectralError::Budget { n, max: opts.max_n });
    }
    Ok(symmetric_eigenvalues(g.adjacency_matrix(), n, opts.solver)?)
}
