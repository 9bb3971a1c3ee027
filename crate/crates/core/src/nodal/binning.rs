use crate::spectral::spectral_edge;

pub const DEFAULT_BINS: usize = 40;
/// Bins with fewer eigenvectors than this are not reported.
pub const MIN_BIN_COUNT: usize = 10;

/// Equal-width bins over the Kesten–McKay support `[-2√(d-1), 2√(d-1)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaBins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LambdaBins {
    pub fn kesten_mckay(d: usize, count: usize) -> Self {
        let e = spectral_edge(d);
        LambdaBins {
            lo: -e,
            hi: e,
            count,
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    /// Bin of `λ`; the upper edge belongs to the last bin, values outside
    /// the support to none.
    pub fn bin_of(&self, lambda: f64) -> Option<usize> {
        if !(lambda >= self.lo && lambda <= self.hi) {
            return None;
        }
        Some((((lambda - self.lo) / self.width()) as usize).min(self.count - 1))
    }

    pub fn center(&self, b: usize) -> f64 {
        self.lo + (b as f64 + 0.5) * self.width()
    }

    /// Member indices of every bin, from a list of eigenvalues.
    pub fn assign(&self, eigenvalues: &[f64]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in eigenvalues.iter().enumerate() {
            if let Some(b) = self.bin_of(l) {
                out[b].push(i);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins() {
        let b = LambdaBins::kesten_mckay(3, 40);
        assert_eq!(b.bin_of(b.lo), Some(0));
        assert_eq!(b.bin_of(b.hi), Some(39));
        assert_eq!(b.bin_of(3.0), None);
        assert_eq!(b.bin_of(0.0), Some(20));
        assert!((b.center(0) - (b.lo + b.width() / 2.0)).abs() < 1e-15);
        let a = b.assign(&[3.0, 0.0, 0.01, -2.8]);
        assert_eq!(a[20], vec![1, 2]);
        assert_eq!(a[0], vec![3]);
    }
}
