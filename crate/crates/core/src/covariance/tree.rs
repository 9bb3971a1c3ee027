use crate::quadrature::{integrate, QuadError, QuadOptions};
use crate::spectral::spectral_edge;

/// Chebyshev polynomial of the second kind by the three-term recurrence,
/// valid for every real `x`. Negative orders follow `U_{-1} = 0`,
/// `U_{-2} = -1`.
pub fn chebyshev_u(k: i64, x: f64) -> f64 {
    match k {
        -2 => return -1.0,
        -1 => return 0.0,
        0 => return 1.0,
        _ if k < -2 => panic!("chebyshev_u defined for k >= -2, got {k}"),
        _ => {}
    }
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_k(λ) / (d (d-1)^{k-1})` with `P_1 = λ`, `P_2 = λ² - d` and
/// `P_{k+2} = λ P_{k+1} - (d-1) P_k`; `k = 0` gives 1.
pub fn tree_cov_recursive(lambda: f64, k: usize, d: usize) -> f64 {
    let df = d as f64;
    if k == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (lambda, lambda * lambda - df);
    if k == 1 {
        return p0 / df;
    }
    for _ in 2..k {
        let p2 = lambda * p1 - (df - 1.0) * p0;
        p0 = p1;
        p1 = p2;
    }
    p1 / (df * (df - 1.0).powi(k as i32 - 1))
}

/// Chebyshev form `((d-1) U_k(x) - U_{k-2}(x)) / (d (d-1)^{k/2})` with
/// `x = λ / (2 sqrt(d-1))`.
pub fn tree_cov_closed(lambda: f64, k: usize, d: usize) -> f64 {
    let df = d as f64;
    let x = lambda / spectral_edge(d);
    let k = k as i64;
    ((df - 1.0) * chebyshev_u(k, x) - chebyshev_u(k - 2, x))
        / (df * (df - 1.0).powf(k as f64 / 2.0))
}

/// Bound `(k+1)(d-1)^{1-k/2}/d` on `|Cov_k^tree|` over the Kesten–McKay support
/// for `k ≥ 1`. At `k = 0` it is `(d-1)/d`, below `Cov_0 = 1`.
pub fn tree_cov_envelope(k: usize, d: usize) -> f64 {
    let df = d as f64;
    (k as f64 + 1.0) * (df - 1.0).powf(1.0 - k as f64 / 2.0) / df
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityCheck {
    pub value: f64,
    pub target: f64,
    pub error_estimate: f64,
}

/// `∫ Cov_k Cov_k' dμ_KM` over the Kesten–McKay support and its expected
/// value `δ_{kk'} / (d (d-1)^{k-1})`.
///
/// Integrates in `θ` with `λ = 2 sqrt(d-1) cos θ`, which removes the
/// square-root behaviour of the density at the edges.
pub fn orthogonality_check(k: usize, k2: usize, d: usize) -> Result<OrthogonalityCheck, QuadError> {
    let edge = spectral_edge(d);
    let opts = QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 0.0,
        max_intervals: 500,
    };
    let q = integrate(
        |t| {
            let l = edge * t.cos();
            tree_cov_closed(l, k, d)
                * tree_cov_closed(l, k2, d)
                * crate::spectral::angular_density(t, d)
        },
        0.0,
        std::f64::consts::PI,
        opts,
    )?;
    // Cov_0 = 1 and μ is a probability measure, so the k = 0 norm is 1
    let target = if k == 0 && k2 == 0 {
        1.0
    } else if k == k2 {
        1.0 / (d as f64 * ((d - 1) as f64).powi(k as i32 - 1))
    } else {
        0.0
    };
    Ok(OrthogonalityCheck {
        value: q.value,
        target,
        error_estimate: q.error,
    })
}
