use std::f64::consts::PI;

use crate::quadrature::{integrate, QuadOptions};

/// Right end `2 sqrt(d - 1)` of the Kesten–McKay support.
pub fn spectral_edge(d: usize) -> f64 {
    2.0 * ((d - 1) as f64).sqrt()
}

/// Kesten–McKay density `d sqrt(4(d-1) - λ²) / (2π (d² - λ²))`, zero off the support.
pub fn kesten_mckay_density(lambda: f64, d: usize) -> f64 {
    let df = d as f64;
    let inner = 4.0 * (df - 1.0) - lambda * lambda;
    if inner <= 0.0 {
        return 0.0;
    }
    df * inner.sqrt() / (2.0 * PI * (df * df - lambda * lambda))
}

/// Density in the angle `θ` where `λ = 2 sqrt(d-1) cos θ`; smooth on `[0, π]`.
pub(crate) fn angular_density(theta: f64, d: usize) -> f64 {
    let df = d as f64;
    let s = theta.sin();
    let c = theta.cos();
    df / (2.0 * PI) * 4.0 * (df - 1.0) * s * s / (df * df - 4.0 * (df - 1.0) * c * c)
}

/// Cumulative Kesten–McKay distribution.
pub fn kesten_mckay_cdf(lambda: f64, d: usize) -> f64 {
    let edge = spectral_edge(d);
    if lambda <= -edge {
        return 0.0;
    }
    if lambda >= edge {
        return 1.0;
    }
    let theta0 = (lambda / edge).acos();
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        max_intervals: 200,
    };
    let q = integrate(|t| angular_density(t, d), theta0, PI, opts).expect("smooth integrand");
    q.value.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert_eq!(kesten_mckay_density(3.0, 3), 0.0);
        assert_eq!(kesten_mckay_density(-2.9, 3), 0.0);
        let at0 = 3.0 / (2.0 * PI) * 8f64.sqrt() / 9.0;
        assert!((kesten_mckay_density(0.0, 3) - at0).abs() < 1e-15);
        assert!((at0 - 0.15005).abs() < 1e-5);
    }

    #[test]
    fn angular_form_matches_density() {
        for d in [3, 4, 7] {
            let edge = spectral_edge(d);
            for k in 1..20 {
                let t = PI * k as f64 / 20.0;
                let l = edge * t.cos();
                let jac = edge * t.sin();
                assert!((angular_density(t, d) - kesten_mckay_density(l, d) * jac).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cdf_symmetry_and_limits() {
        for d in [3, 5] {
            assert!((kesten_mckay_cdf(0.0, d) - 0.5).abs() < 1e-13);
            let x = 0.7;
            assert!((kesten_mckay_cdf(x, d) + kesten_mckay_cdf(-x, d) - 1.0).abs() < 1e-13);
            assert_eq!(kesten_mckay_cdf(10.0, d), 1.0);
            assert_eq!(kesten_mckay_cdf(-10.0, d), 0.0);
        }
    }
}
