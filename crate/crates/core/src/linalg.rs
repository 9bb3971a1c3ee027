//! Small dense factorizations for covariance matrices.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is not positive semidefinite (residual diagonal {value:e} at {index})")]
    Indefinite { index: usize, value: f64 },
    #[error("matrix buffer has {len} entries, expected {m}x{m}")]
    Shape { m: usize, len: usize },
}

/// Lower Cholesky factor of a symmetric positive definite `m x m` matrix.
pub fn cholesky(a: &[f64], m: usize) -> Result<Vec<f64>, LinalgError> {
    if a.len() != m * m {
        return Err(LinalgError::Shape { m, len: a.len() });
    }
    let mut l = vec![0.0; m * m];
    for j in 0..m {
        let mut diag = a[j * m + j];
        for k in 0..j {
            diag -= l[j * m + k] * l[j * m + k];
        }
        if diag.is_nan() || diag <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l[j * m + j] = ljj;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = s / ljj;
        }
    }
    Ok(l)
}

/// `P A P^T = L L^T` for a symmetric positive semidefinite `A`.
///
/// `perm[r]` is the original index of row `r`; `l` is `m x rank`, row-major,
/// lower trapezoidal. Rows at or after `rank` are linear combinations of the
/// pivot rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotedCholesky {
    pub m: usize,
    pub rank: usize,
    pub perm: Vec<usize>,
    pub l: Vec<f64>,
}

impl PivotedCholesky {
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.l[r * self.rank + c]
    }
}

/// Diagonal pivoting; stops once every remaining diagonal is at most
/// `tol * max_diag`. A remaining diagonal below `-tol * max_diag` is reported
/// as indefinite.
pub fn pivoted_cholesky(a: &[f64], m: usize, tol: f64) -> Result<PivotedCholesky, LinalgError> {
    if a.len() != m * m {
        return Err(LinalgError::Shape { m, len: a.len() });
    }
    let scale = (0..m).map(|i| a[i * m + i]).fold(0.0, f64::max);
    let mut perm: Vec<usize> = (0..m).collect();
    // Working copy in the permuted order.
    let mut w = a.to_vec();
    let mut l = vec![0.0; m * m];
    let mut rank = 0;
    for j in 0..m {
        let (mut best, mut best_val) = (j, f64::NEG_INFINITY);
        for i in j..m {
            let v = w[i * m + i];
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        if best_val <= tol * scale {
            if let Some(i) = (j..m).find(|&i| w[i * m + i] < -tol * scale) {
                return Err(LinalgError::Indefinite {
                    index: perm[i],
                    value: w[i * m + i],
                });
            }
            break;
        }
        if best != j {
            perm.swap(best, j);
            for c in 0..m {
                w.swap(best * m + c, j * m + c);
            }
            for r in 0..m {
                w.swap(r * m + best, r * m + j);
            }
            for c in 0..j {
                l.swap(best * m + c, j * m + c);
            }
        }
        let ljj = best_val.sqrt();
        l[j * m + j] = ljj;
        for i in j + 1..m {
            l[i * m + j] = w[i * m + j] / ljj;
        }
        for i in j + 1..m {
            for k in j + 1..=i {
                let v = w[i * m + k] - l[i * m + j] * l[k * m + j];
                w[i * m + k] = v;
                w[k * m + i] = v;
            }
        }
        rank += 1;
    }
    let mut trap = vec![0.0; m * rank];
    for r in 0..m {
        for c in 0..rank.min(r + 1) {
            trap[r * rank + c] = l[r * m + c];
        }
    }
    Ok(PivotedCholesky {
        m,
        rank,
        perm,
        l: trap,
    })
}
