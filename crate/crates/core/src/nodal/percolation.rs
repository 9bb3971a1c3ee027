use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{induce_nodal, NodalError, NodalOptions};
use crate::graph::{Components, RegularGraph, UnionFind};
use crate::spectral::Spectrum;

/// Largest-component fraction taken as the onset of a giant component.
pub const GIANT_THRESHOLD: f64 = 0.05;

/// Bond percolation on a regular graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationGraph {
    pub p: f64,
    pub seed: u64,
    pub retained: Vec<(u32, u32)>,
    pub components: Components,
}

/// Keeps each edge independently with probability `p`, visiting edges in
/// sorted order with one uniform draw each.
pub fn percolate(g: &RegularGraph, p: f64, seed: u64) -> Result<PercolationGraph, NodalError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NodalError::Probability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let retained: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < p)
        .collect();
    let mut uf = UnionFind::new(g.n());
    for &(a, b) in &retained {
        uf.union(a as usize, b as usize);
    }
    Ok(PercolationGraph {
        p,
        seed,
        retained,
        components: uf.components(),
    })
}

/// `C(d, j) p^j (1-p)^{d-j}`
pub fn p_j_percolation(p: f64, d: usize, j: usize) -> Result<f64, NodalError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NodalError::Probability(p));
    }
    if j > d {
        return Err(NodalError::Valency { j, d });
    }
    let binom = (0..j).fold(1.0, |acc, i| acc * (d - i) as f64 / (i + 1) as f64);
    Ok(binom * p.powi(j as i32) * (1.0 - p).powi((d - j) as i32))
}

/// Mean largest and second-largest component fractions at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiantPoint {
    pub grid: f64,
    pub largest_frac: f64,
    pub second_frac: f64,
    /// Samples averaged: seeds for percolation, eigenvectors for nodal scans.
    pub seeds: usize,
}

fn fractions(c: &Components, n: usize) -> (f64, f64) {
    let (a, b) = c.two_largest();
    (a as f64 / n as f64, b as f64 / n as f64)
}

/// Percolation sweep over `grid`, averaging over `seeds` at every point.
pub fn percolation_scan(
    g: &RegularGraph,
    grid: &[f64],
    seeds: &[u64],
) -> Result<Vec<GiantPoint>, NodalError> {
    grid.iter()
        .map(|&p| {
            let (mut l, mut s) = (0.0, 0.0);
            for &seed in seeds {
                let (a, b) = fractions(&percolate(g, p, seed)?.components, g.n());
                l += a;
                s += b;
            }
            let k = seeds.len().max(1) as f64;
            Ok(GiantPoint {
                grid: p,
                largest_frac: l / k,
                second_frac: s / k,
                seeds: seeds.len(),
            })
        })
        .collect()
}

/// Nodal sweep: at each `λ` in `grid`, average the domain fractions over
/// eigenvectors with eigenvalue within `half_width`. Points with no
/// eigenvector report zero fractions and `seeds = 0`.
pub fn nodal_scan(
    g: &RegularGraph,
    spectrum: &Spectrum,
    grid: &[f64],
    half_width: f64,
    opts: NodalOptions,
) -> Result<Vec<GiantPoint>, NodalError> {
    grid.iter()
        .map(|&l| {
            let w = spectrum.window(l - half_width, l + half_width);
            let (mut a, mut b) = (0.0, 0.0);
            for &i in &w.members {
                let ng = induce_nodal(g, spectrum.vector(i), opts)?;
                let (x, y) = fractions(ng.components(), g.n());
                a += x;
                b += y;
            }
            let k = w.members.len();
            let div = k.max(1) as f64;
            Ok(GiantPoint {
                grid: l,
                largest_frac: a / div,
                second_frac: b / div,
                seeds: k,
            })
        })
        .collect()
}

/// First grid value whose largest fraction reaches `level`, scanning in the
/// given order; points without samples are skipped.
pub fn threshold_crossing(points: &[GiantPoint], level: f64) -> Option<f64> {
    points
        .iter()
        .find(|p| p.seeds > 0 && p.largest_frac >= level)
        .map(|p| p.grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_regular;

    #[test]
    fn extremes() {
        let g = generate_regular(200, 3, 1, Default::default()).unwrap();
        let full = percolate(&g, 1.0, 3).unwrap();
        assert_eq!(full.retained.len(), g.edges().len());
        assert_eq!(full.components.count(), g.connected_components().count());
        let none = percolate(&g, 0.0, 3).unwrap();
        assert_eq!(none.components.count(), 200);
        assert!(percolate(&g, 1.5, 0).is_err());
        assert_eq!(
            percolate(&g, 0.4, 9).unwrap(),
            percolate(&g, 0.4, 9).unwrap()
        );
    }

    #[test]
    fn binomial_valency() {
        let p: Vec<f64> = (0..=3)
            .map(|j| p_j_percolation(0.5, 3, j).unwrap())
            .collect();
        assert_eq!(p, vec![0.125, 0.375, 0.375, 0.125]);
        assert_eq!(p_j_percolation(1.0, 4, 4).unwrap(), 1.0);
        assert_eq!(p_j_percolation(1.0, 4, 2).unwrap(), 0.0);
        let s: f64 = (0..=7).map(|j| p_j_percolation(0.3, 7, j).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(p_j_percolation(0.3, 3, 4).is_err());
    }

    #[test]
    fn crossing() {
        let pts: Vec<GiantPoint> = [0.01, 0.02, 0.07, 0.3]
            .iter()
            .enumerate()
            .map(|(i, &f)| GiantPoint {
                grid: i as f64,
                largest_frac: f,
                second_frac: 0.0,
                seeds: 1,
            })
            .collect();
        assert_eq!(threshold_crossing(&pts, 0.05), Some(2.0));
        assert_eq!(threshold_crossing(&pts, 0.5), None);
    }
}
