//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration. The QL rotations depend only on the tridiagonal matrix, so
//! they are recorded during the iteration and replayed afterwards over
//! column blocks of the eigenvector matrix. Replaying in blocks keeps the
//! working set in cache, which is what makes `n` in the thousands practical.
//!
//! Eigenvectors are returned as rows of a row-major matrix: row `i` is the
//! unit-norm eigenvector belonging to `values[i]`.

use thiserror::Error;

use crate::kernel::multiversion;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("matrix buffer has {len} entries, expected {n}x{n}")]
    Shape { n: usize, len: usize },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error(
        "QL iteration did not converge for eigenvalue index {index} after {iterations} sweeps"
    )]
    NoConvergence { index: usize, iterations: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// QL sweeps allowed per eigenvalue before giving up.
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_sweeps: 60 }
    }
}

/// Eigenvalues in descending order with unit-norm eigenvectors stored row-wise.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }
}

/// Full decomposition of the symmetric `n x n` row-major matrix. Only the
/// upper triangle is read; the buffer is consumed as workspace.
pub fn symmetric_eigen(
    matrix: Vec<f64>,
    n: usize,
    opts: SolverOptions,
) -> Result<SymmetricEigen, SolverError> {
    let mut a = matrix;
    check_input(&a, n)?;
    if n == 0 {
        return Ok(SymmetricEigen {
            n,
            values: vec![],
            vectors: vec![],
        });
    }
    let mut tri = tridiagonalize(&mut a, n);
    let mut basis = a;
    form_transposed_basis(&mut basis, n, &tri.taus);
    let rotations = ql_iterate(&mut tri.diag, &mut tri.off, opts, true)?;
    replay(&rotations, &mut basis, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| tri.diag[y].total_cmp(&tri.diag[x]));
    let values = order.iter().map(|&i| tri.diag[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&basis[src * n..(src + 1) * n]);
    }
    Ok(SymmetricEigen { n, values, vectors })
}

/// Eigenvalues only, descending. `O(n^3)` for the reduction, `O(n^2)` after.
pub fn symmetric_eigenvalues(
    matrix: Vec<f64>,
    n: usize,
    opts: SolverOptions,
) -> Result<Vec<f64>, SolverError> {
    let mut a = matrix;
    check_input(&a, n)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let mut tri = tridiagonalize(&mut a, n);
    ql_iterate(&mut tri.diag, &mut tri.off, opts, false)?;
    let mut values = tri.diag;
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

fn check_input(a: &[f64], n: usize) -> Result<(), SolverError> {
    if a.len() != n * n {
        return Err(SolverError::Shape { n, len: a.len() });
    }
    for r in 0..n {
        for c in r..n {
            if !a[r * n + c].is_finite() {
                return Err(SolverError::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

multiversion!(tridiagonalize(a: &mut [f64], n: usize) -> Tridiagonal => tridiagonalize_impl(a, n));
multiversion!(form_transposed_basis(a: &mut [f64], n: usize, taus: &[f64]) => form_transposed_basis_impl(a, n, taus));
multiversion!(replay(log: &RotationLog, rows: &mut [f64], n: usize) => log.replay_impl(rows, n));

struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`; the last entry is zero.
    off: Vec<f64>,
    taus: Vec<f64>,
}

/// Reduces the upper triangle of `a` in place. On return row `i` holds the
/// Householder vector of step `i` in columns `i + 2..n` (its leading unit
/// entry at column `i + 1` is implicit).
///
/// The rank-2 update of step `i` is deferred and fused with the matrix-vector
/// product of step `i + 1`, so the trailing triangle is streamed once per step.
#[inline(always)]
fn tridiagonalize_impl(a: &mut [f64], n: usize) -> Tridiagonal {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut taus = vec![0.0; n.saturating_sub(2)];
    // Vectors are indexed by absolute column; `pending` marks that (pv, pw)
    // still has to be subtracted from rows >= i.
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut pv = vec![0.0; n];
    let mut pw = vec![0.0; n];
    let mut pending = false;

    let rank2 = |seg: &mut [f64], r: usize, pv: &[f64], pw: &[f64]| {
        let (vr, wr) = (pv[r], pw[r]);
        for ((x, &wc), &vc) in seg.iter_mut().zip(&pw[r..]).zip(&pv[r..]) {
            *x -= vr * wc + wr * vc;
        }
    };

    for i in 0..n.saturating_sub(2) {
        if pending {
            rank2(&mut a[i * n + i..(i + 1) * n], i, &pv, &pw);
        }
        let row = &mut a[i * n + i + 1..(i + 1) * n];
        let alpha = row[0];
        let tail = dot(&row[1..], &row[1..]);
        if tail == 0.0 {
            taus[i] = 0.0;
            off[i] = alpha;
            if pending {
                for r in i + 1..n {
                    rank2(&mut a[r * n + r..(r + 1) * n], r, &pv, &pw);
                }
                pending = false;
            }
            continue;
        }
        let norm = (alpha * alpha + tail).sqrt();
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let tau = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        row[0] = 1.0;
        for x in &mut row[1..] {
            *x *= scale;
        }
        v[i + 1..].copy_from_slice(row);
        row[0] = beta;
        off[i] = beta;
        taus[i] = tau;

        // p = tau * A22 v over the trailing block, applying the deferred
        // update to each row just before it is read.
        p[i + 1..].fill(0.0);
        for r in i + 1..n {
            let seg = &mut a[r * n + r..(r + 1) * n];
            if pending {
                rank2(seg, r, &pv, &pw);
            }
            let vr = v[r];
            let acc = seg[0] * vr + dot(&seg[1..], &v[r + 1..]);
            for (&x, pc) in seg[1..].iter().zip(p[r + 1..].iter_mut()) {
                *pc += x * vr;
            }
            p[r] += acc;
        }
        let mut ptv = 0.0;
        for (pc, &vc) in p[i + 1..].iter_mut().zip(&v[i + 1..]) {
            *pc *= tau;
            ptv += *pc * vc;
        }
        let k = 0.5 * tau * ptv;
        for (pc, &vc) in p[i + 1..].iter_mut().zip(&v[i + 1..]) {
            *pc -= k * vc;
        }
        std::mem::swap(&mut pv, &mut v);
        std::mem::swap(&mut pw, &mut p);
        pending = true;
    }
    if pending {
        for r in n - 2..n {
            rank2(&mut a[r * n + r..(r + 1) * n], r, &pv, &pw);
        }
    }
    for i in 0..n {
        diag[i] = a[i * n + i];
    }
    if n >= 2 {
        off[n - 2] = a[(n - 2) * n + n - 1];
    }
    off[n - 1] = 0.0;
    Tridiagonal { diag, off, taus }
}

/// Overwrites `a` with `Q^T = H_{n-3} ... H_0`, reading the reflectors left
/// in the upper triangle by [`tridiagonalize`].
///
/// Each row of the product is transformed independently, so reflectors are
/// applied in groups: a group is copied out once and then run over each row
/// while that row is in cache.
#[inline(always)]
fn form_transposed_basis_impl(a: &mut [f64], n: usize, taus: &[f64]) {
    const GROUP: usize = 32;
    let identity_row = |a: &mut [f64], r: usize| {
        a[r * n..(r + 1) * n].fill(0.0);
        a[r * n + r] = 1.0;
    };
    for r in taus.len()..n {
        identity_row(a, r);
    }
    let mut refl = vec![0.0; GROUP * n];
    let mut hi = taus.len();
    while hi > 0 {
        let lo = hi.saturating_sub(GROUP);
        // Reflector i lives in row i; rows lo + 1..=hi are rewritten below.
        for i in lo..hi {
            let v = &mut refl[(i - lo) * n..(i - lo + 1) * n];
            v[i + 1] = 1.0;
            v[i + 2..].copy_from_slice(&a[i * n + i + 2..(i + 1) * n]);
        }
        for r in lo + 1..n {
            // Step i touches rows > i and first resets row i + 1.
            let top = (r - 1).min(hi - 1);
            if r <= hi {
                identity_row(a, r);
            }
            let row = &mut a[r * n..(r + 1) * n];
            for i in (lo..=top).rev() {
                let tau = taus[i];
                if tau == 0.0 {
                    continue;
                }
                let v = &refl[(i - lo) * n + i + 1..(i - lo + 1) * n];
                let seg = &mut row[i + 1..];
                let t = tau * dot(seg, v);
                if t != 0.0 {
                    for (x, &y) in seg.iter_mut().zip(v) {
                        *x -= t * y;
                    }
                }
            }
        }
        hi = lo;
    }
    if !taus.is_empty() {
        identity_row(a, 0);
    }
}

/// Dot product with independent partial sums so the reduction vectorizes.
#[inline(always)]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    let (x, y) = (&x[..n], &y[..n]);
    let mut acc = [0.0f64; 8];
    let mut xc = x.chunks_exact(8);
    let mut yc = y.chunks_exact(8);
    for (a, b) in (&mut xc).zip(&mut yc) {
        for k in 0..8 {
            acc[k] += a[k] * b[k];
        }
    }
    let mut tail = 0.0;
    for (a, b) in xc.remainder().iter().zip(yc.remainder()) {
        tail += a * b;
    }
    acc.iter().sum::<f64>() + tail
}

/// One QL sweep touches rotations `hi - 1, hi - 2, ...` down to `hi - count`.
struct Sweep {
    hi: u32,
    count: u32,
    start: usize,
}

#[derive(Default)]
struct RotationLog {
    sweeps: Vec<Sweep>,
    cs: Vec<[f64; 2]>,
}

impl RotationLog {
    /// Applies every recorded rotation to the rows of `rows`. Columns are
    /// processed in strips packed into a contiguous panel, so consecutive
    /// rotations walk adjacent memory instead of striding by `n`.
    #[inline(always)]
    fn replay_impl(&self, rows: &mut [f64], n: usize) {
        let mut panel = vec![[0.0f64; STRIP]; n];
        let mut j0 = 0;
        while j0 < n {
            let w = STRIP.min(n - j0);
            for (i, p) in panel.iter_mut().enumerate() {
                p[..w].copy_from_slice(&rows[i * n + j0..i * n + j0 + w]);
                p[w..].fill(0.0);
            }
            for sweep in &self.sweeps {
                let rots = &self.cs[sweep.start..sweep.start + sweep.count as usize];
                sweep_panel(&mut panel, sweep.hi as usize, rots);
            }
            for (i, p) in panel.iter().enumerate() {
                rows[i * n + j0..i * n + j0 + w].copy_from_slice(&p[..w]);
            }
            j0 += w;
        }
    }
}

const STRIP: usize = 16;

/// Rotation `t` mixes rows `hi - 1 - t` and `hi - t`. The lower row of each
/// rotation is the upper row of the previous one, so it stays in `carry`.
#[inline(always)]
fn sweep_panel(panel: &mut [[f64; STRIP]], hi: usize, rots: &[[f64; 2]]) {
    let mut carry = panel[hi];
    let mut below = hi;
    for &[c, s] in rots {
        let i = below - 1;
        let x = panel[i];
        let out = &mut panel[below];
        for j in 0..STRIP {
            let (a, b) = (x[j], carry[j]);
            out[j] = s * a + c * b;
            carry[j] = c * a - s * b;
        }
        below = i;
    }
    panel[below] = carry;
}

/// Implicit-shift QL on (`diag`, `off`). Eigenvalues are left in `diag`.
fn ql_iterate(
    diag: &mut [f64],
    off: &mut [f64],
    opts: SolverOptions,
    record: bool,
) -> Result<RotationLog, SolverError> {
    let n = diag.len();
    let mut log = RotationLog::default();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > opts.max_sweeps {
                return Err(SolverError::NoConvergence {
                    index: l,
                    iterations: opts.max_sweeps,
                });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let start = log.cs.len();
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if record {
                    log.cs.push([c, s]);
                }
            }
            if record && log.cs.len() > start {
                log.sweeps.push(Sweep {
                    hi: m as u32,
                    count: (log.cs.len() - start) as u32,
                    start,
                });
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, eig: &SymmetricEigen) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let x = eig.vector(i);
            for r in 0..n {
                let ax: f64 = (0..n).map(|c| a[r * n + c] * x[c]).sum();
                worst = worst.max((ax - eig.values[i] * x[r]).abs());
            }
        }
        worst
    }

    fn orthogonality(n: usize, eig: &SymmetricEigen) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = eig
                    .vector(i)
                    .iter()
                    .zip(eig.vector(j))
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_matrix() {
        let a = vec![2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0];
        let eig = symmetric_eigen(a.clone(), 3, SolverOptions::default()).unwrap();
        assert_eq!(eig.values, vec![5.0, 2.0, -1.0]);
        assert!(residual(&a, 3, &eig) < 1e-14);
    }

    #[test]
    fn one_and_two_by_two() {
        let eig = symmetric_eigen(vec![4.0], 1, SolverOptions::default()).unwrap();
        assert_eq!(eig.values, vec![4.0]);
        assert_eq!(eig.vectors, vec![1.0]);

        let a = vec![2.0, 1.0, 1.0, 2.0];
        let eig = symmetric_eigen(a.clone(), 2, SolverOptions::default()).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        assert!(residual(&a, 2, &eig) < 1e-14);
    }

    #[test]
    fn dense_pseudo_random_matrix() {
        let n = 37;
        let mut state = 0x2545_f491_4f6c_dd1d_u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in r..n {
                let x = next();
                a[r * n + c] = x;
                a[c * n + r] = x;
            }
        }
        let eig = symmetric_eigen(a.clone(), n, SolverOptions::default()).unwrap();
        assert!(residual(&a, n, &eig) < 1e-12);
        assert!(orthogonality(n, &eig) < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        assert!((eig.values.iter().sum::<f64>() - trace).abs() < 1e-12);

        let only = symmetric_eigenvalues(a, n, SolverOptions::default()).unwrap();
        for (x, y) in only.iter().zip(&eig.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn block_structure_with_zero_reflectors() {
        // Blocks {0..31}, {31}, {32..70}: some reduction steps see an
        // already-zero column and must skip their reflector.
        let n = 70;
        let block = |i: usize| {
            if i < 31 {
                0
            } else if i == 31 {
                1
            } else {
                2
            }
        };
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for c in r..n {
                if block(r) == block(c) && r != 31 {
                    let x =
                        ((r * 7 + c * 13) % 11) as f64 - 5.0 + 0.1 * (r as f64 - c as f64).sin();
                    a[r * n + c] = x;
                    a[c * n + r] = x;
                }
            }
        }
        let eig = symmetric_eigen(a.clone(), n, SolverOptions::default()).unwrap();
        assert!(residual(&a, n, &eig) < 1e-11);
        assert!(orthogonality(n, &eig) < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_keeps_orthogonality() {
        // J - I on 6 vertices: eigenvalue 5 once and -1 five times.
        let n = 6;
        let a: Vec<f64> = (0..n * n)
            .map(|k| if k / n == k % n { 0.0 } else { 1.0 })
            .collect();
        let eig = symmetric_eigen(a.clone(), n, SolverOptions::default()).unwrap();
        assert!((eig.values[0] - 5.0).abs() < 1e-13);
        assert!(eig.values[1..].iter().all(|v| (v + 1.0).abs() < 1e-13));
        assert!(residual(&a, n, &eig) < 1e-13);
        assert!(orthogonality(n, &eig) < 1e-13);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = vec![1.0, 2.0, 0.5, 2.0, -1.0, 3.0, 0.5, 3.0, 0.25];
        let err = symmetric_eigen(a, 3, SolverOptions { max_sweeps: 0 }).unwrap_err();
        assert!(matches!(err, SolverError::NoConvergence { index: 0, .. }));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            symmetric_eigen(vec![1.0; 5], 2, SolverOptions::default()),
            Err(SolverError::Shape { .. })
        ));
        assert!(matches!(
            symmetric_eigen(
                vec![1.0, f64::NAN, f64::NAN, 1.0],
                2,
                SolverOptions::default()
            ),
            Err(SolverError::NonFinite { row: 0, col: 1 })
        ));
    }
}
