use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

/// 99% quantile of the Kolmogorov distribution.
pub const KOLMOGOROV_Q99: f64 = 1.6276;

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`: a starting value from `erfc_inv`
/// polished by one Newton step.
pub fn normal_quantile(p: f64) -> f64 {
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    // work on the smaller tail to keep relative accuracy
    let (r, sign) = if x > 0.0 {
        (normal_cdf(-x) - (1.0 - p), -1.0)
    } else {
        (normal_cdf(x) - p, 1.0)
    };
    let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    if density > 0.0 {
        x - sign * r / density
    } else {
        x
    }
}

/// Right-continuous step function `F(x) = #{samples ≤ x} / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// Panics on an empty sample or NaN entries.
    pub fn new(samples: &[f64]) -> Self {
        assert!(
            !samples.is_empty(),
            "empirical cdf needs at least one sample"
        );
        assert!(samples.iter().all(|x| !x.is_nan()), "NaN sample");
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsStatistic {
    pub distance: f64,
    pub n: usize,
    /// `sqrt(N) * distance`
    pub scaled: f64,
    /// Asymptotic p-value `1 - K(scaled)`.
    pub p_value: f64,
}

/// `sup_x |F(x) - target(x)|`, attained at a jump of `F`: both the gap just
/// before each distinct sample value and the gap at it are checked.
pub fn ks_distance<T: Fn(f64) -> f64>(f: &EmpiricalCdf, target: T) -> KsStatistic {
    let s = f.sorted();
    let n = s.len();
    let nf = n as f64;
    let mut dist: f64 = 0.0;
    let mut i = 0;
    while i < n {
        let x = s[i];
        let mut j = i;
        while j < n && s[j] == x {
            j += 1;
        }
        let t = target(x);
        let before = i as f64 / nf;
        let after = j as f64 / nf;
        dist = dist.max((t - before).abs()).max((after - t).abs());
        i = j;
    }
    let scaled = nf.sqrt() * dist;
    KsStatistic {
        distance: dist,
        n,
        scaled,
        p_value: 1.0 - kolmogorov_cdf(scaled),
    }
}

/// Kolmogorov limit law `K(y) = 1 - 2 Σ_{q≥1} (-1)^{q-1} exp(-2 q² y²)`.
///
/// The alternating series is summed until a term drops below `1e-12`. For
/// small `y`, where it converges slowly, the equivalent theta-function form
/// `sqrt(2π)/y Σ exp(-(2q-1)² π² / (8 y²))` is used.
pub fn kolmogorov_cdf(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y < 0.5 {
        let mut sum = 0.0;
        for q in 1.. {
            let t = (-((2 * q - 1) as f64).powi(2) * PI * PI / (8.0 * y * y)).exp();
            sum += t;
            if t < 1e-16 {
                break;
            }
        }
        return ((2.0 * PI).sqrt() / y * sum).min(1.0);
    }
    let mut sum = 0.0;
    for q in 1.. {
        let t = (-2.0 * (q * q) as f64 * y * y).exp();
        if t < 1e-12 {
            break;
        }
        sum += if q % 2 == 1 { t } else { -t };
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}
