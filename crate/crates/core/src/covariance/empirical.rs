use crate::graph::{DistanceTable, RegularGraph};
use crate::kernel::multiversion;
use crate::spectral::Spectrum;

use super::tree::tree_cov_closed;

/// `(1/M_k) Σ_{dist(i,j)=k} f_i f_j` over ordered pairs, by BFS from every
/// vertex. `None` when no pair is at distance `k`.
pub fn empirical_cov(g: &RegularGraph, f: &[f64], k: u32) -> Option<f64> {
    assert_eq!(f.len(), g.n(), "vector length must equal n");
    let mut sum = 0.0;
    let mut pairs = 0u64;
    for i in 0..g.n() {
        let dist = g.bfs_distances(i);
        let mut acc = 0.0;
        for (j, &dij) in dist.iter().enumerate() {
            if dij == k {
                acc += f[j];
                pairs += 1;
            }
        }
        sum += f[i] * acc;
    }
    (pairs > 0).then(|| sum / pairs as f64)
}

/// Empirical covariances of every eigenvector at every distance `0..=kmax`.
#[derive(Debug, Clone)]
pub struct CovarianceTable {
    n: usize,
    kmax: usize,
    /// `M_k` for `k = 0..=kmax`
    pair_counts: Vec<u64>,
    /// `values[i * (kmax + 1) + k]`
    values: Vec<f64>,
}

/// Eigenvector columns handled per pass over the distance table.
const PANEL: usize = 32;

impl CovarianceTable {
    /// Accumulates `Σ f_i f_j` over all pairs at once.
    ///
    /// Eigenvectors are processed in panels of [`PANEL`]; for each source
    /// vertex `i` the panel rows of all `j > i` are summed per distance class
    /// and then multiplied by row `i`, so each pair costs one vector add.
    pub fn compute(spectrum: &Spectrum, table: &DistanceTable, kmax: usize) -> Self {
        let n = spectrum.n();
        assert_eq!(table.n(), n, "distance table and spectrum disagree on n");
        let mut pair_counts = vec![0u64; kmax + 1];
        for i in 0..n {
            for &x in table.row(i) {
                if (x as usize) <= kmax {
                    pair_counts[x as usize] += 1;
                }
            }
        }
        let mut values = vec![0.0; n * (kmax + 1)];
        let mut panel = vec![[0.0f64; PANEL]; n];
        let mut c0 = 0;
        while c0 < n {
            let w = PANEL.min(n - c0);
            for (v, row) in panel.iter_mut().enumerate() {
                row.fill(0.0);
                for (c, x) in row[..w].iter_mut().enumerate() {
                    *x = spectrum.vector(c0 + c)[v];
                }
            }
            let sums = accumulate(&panel, table, kmax);
            for c in 0..w {
                for k in 0..=kmax {
                    let m = pair_counts[k];
                    values[(c0 + c) * (kmax + 1) + k] = if m > 0 {
                        sums[k][c] / m as f64
                    } else {
                        f64::NAN
                    };
                }
            }
            c0 += w;
        }
        CovarianceTable {
            n,
            kmax,
            pair_counts,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn pair_counts(&self) -> &[u64] {
        &self.pair_counts
    }

    /// `Cov_k^emp(f^{(i)})`, `None` when `M_k = 0`.
    pub fn get(&self, i: usize, k: usize) -> Option<f64> {
        (self.pair_counts[k] > 0).then(|| self.values[i * (self.kmax + 1) + k])
    }
}

multiversion!(accumulate(panel: &[[f64; PANEL]], table: &DistanceTable, kmax: usize) -> Vec<[f64; PANEL]> => accumulate_impl(panel, table, kmax));

#[inline(always)]
fn accumulate_impl(
    panel: &[[f64; PANEL]],
    table: &DistanceTable,
    kmax: usize,
) -> Vec<[f64; PANEL]> {
    let n = panel.len();
    let mut totals = vec![[0.0f64; PANEL]; kmax + 1];
    let mut class = vec![[0.0f64; PANEL]; kmax + 1];
    for i in 0..n {
        for c in class.iter_mut() {
            c.fill(0.0);
        }
        let row = table.row(i);
        for j in i + 1..n {
            let k = row[j] as usize;
            if k <= kmax {
                let (dst, src) = (&mut class[k], &panel[j]);
                for c in 0..PANEL {
                    dst[c] += src[c];
                }
            }
        }
        let fi = &panel[i];
        for c in 0..PANEL {
            totals[0][c] += fi[c] * fi[c];
        }
        for k in 1..=kmax {
            for c in 0..PANEL {
                totals[k][c] += 2.0 * fi[c] * class[k][c];
            }
        }
    }
    totals
}

/// Scaled norms and their deviation at one distance `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormDeviation {
    pub k: usize,
    pub n_emp: f64,
    pub n_tree: f64,
    /// `(N_emp - N_tree) / (N_emp + N_tree)`; `None` when both norms vanish.
    pub delta: Option<f64>,
}

/// `N_k = (1/n) sqrt(Σ_i Cov_k(f^{(i)})²)` for the empirical and tree
/// covariances over the whole spectrum. `None` when `M_k = 0`.
pub fn norm_deviation(
    table: &CovarianceTable,
    spectrum: &Spectrum,
    k: usize,
) -> Option<NormDeviation> {
    table.get(0, k)?;
    let n = table.n();
    let d = spectrum.d();
    let mut se = 0.0;
    let mut st = 0.0;
    for (i, &l) in spectrum.eigenvalues().iter().enumerate() {
        let e = table.get(i, k).expect("pairs exist");
        let t = tree_cov_closed(l, k, d);
        se += e * e;
        st += t * t;
    }
    let n_emp = se.sqrt() / n as f64;
    let n_tree = st.sqrt() / n as f64;
    Some(NormDeviation {
        k,
        n_emp,
        n_tree,
        delta: deviation(n_emp, n_tree),
    })
}

/// `(a - b) / (a + b)` for non-negative norms; `None` when both are zero.
pub fn deviation(a: f64, b: f64) -> Option<f64> {
    (a + b > 0.0).then(|| (a - b) / (a + b))
}
