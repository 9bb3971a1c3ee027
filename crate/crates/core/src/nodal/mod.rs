//! Nodal domains of eigenvectors, their Gaussian predictions and the
//! percolation comparison.

mod binning;
mod gaussian;
mod percolation;
mod trees;

pub use binning::{LambdaBins, DEFAULT_BINS, MIN_BIN_COUNT};
pub use gaussian::{
    nodal_lower_bound, p_e_gaussian, p_j_gaussian, p_j_gaussian_all, p_j_gaussian_full,
    p_j_monte_carlo,
};
pub use percolation::{
    nodal_scan, p_j_percolation, percolate, percolation_scan, threshold_crossing, GiantPoint,
    PercolationGraph, GIANT_THRESHOLD,
};
pub use trees::{
    expected_small_domains, free_trees, ShapeTerm, SmallDomainPrediction, TreeShape, MAX_TREE_SIZE,
};

use thiserror::Error;

use crate::graph::{Components, RegularGraph, UnionFind};
use crate::spectral::{Spectrum, Tolerances};
use crate::stats::MvnError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodalError {
    #[error("vector has length {got}, graph has {n} vertices")]
    Length { n: usize, got: usize },
    #[error("component {vertex} is zero ({value:e}) within tolerance")]
    ZeroComponent { vertex: usize, value: f64 },
    #[error("|λ| = {lambda} outside the allowed range {limit}")]
    OutsideRange { lambda: f64, limit: f64 },
    #[error("valency {j} above degree {d}")]
    Valency { j: usize, d: usize },
    #[error("tree size {k} above the supported maximum {max}")]
    TreeSize { k: usize, max: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("integration: {0}")]
    Integration(#[from] MvnError),
}

/// What to do with components that are numerically zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroPolicy {
    #[default]
    Reject,
    /// Take the sign of the neighbor with the largest magnitude.
    Perturb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalOptions {
    /// Components with `|f_i|` below this count as zero.
    pub zero_tol: f64,
    pub policy: ZeroPolicy,
}

impl Default for NodalOptions {
    fn default() -> Self {
        NodalOptions {
            zero_tol: 1e-10,
            policy: ZeroPolicy::Reject,
        }
    }
}

/// The graph left after deleting every edge whose endpoints have opposite
/// signs.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalGraph {
    n: usize,
    d: usize,
    parent_edges: usize,
    signs: Vec<i8>,
    retained: Vec<(u32, u32)>,
    components: Components,
    perturbed: Vec<usize>,
}

pub fn induce_nodal(
    g: &RegularGraph,
    f: &[f64],
    opts: NodalOptions,
) -> Result<NodalGraph, NodalError> {
    let n = g.n();
    if f.len() != n {
        return Err(NodalError::Length { n, got: f.len() });
    }
    let mut signs = vec![0i8; n];
    let mut perturbed = Vec::new();
    for v in 0..n {
        if f[v].abs() >= opts.zero_tol {
            signs[v] = if f[v] > 0.0 { 1 } else { -1 };
            continue;
        }
        if opts.policy == ZeroPolicy::Reject {
            return Err(NodalError::ZeroComponent {
                vertex: v,
                value: f[v],
            });
        }
        let best = g
            .neighbors(v)
            .iter()
            .map(|&u| f[u as usize])
            .max_by(|a, b| a.abs().total_cmp(&b.abs()));
        match best {
            Some(x) if x.abs() >= opts.zero_tol => {
                signs[v] = if x > 0.0 { 1 } else { -1 };
                perturbed.push(v);
            }
            _ => {
                return Err(NodalError::ZeroComponent {
                    vertex: v,
                    value: f[v],
                })
            }
        }
    }
    let retained: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| signs[a as usize] == signs[b as usize])
        .collect();
    let mut uf = UnionFind::new(n);
    for &(a, b) in &retained {
        uf.union(a as usize, b as usize);
    }
    Ok(NodalGraph {
        n,
        d: g.d(),
        parent_edges: g.edges().len(),
        signs,
        retained,
        components: uf.components(),
        perturbed,
    })
}

impl NodalGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodal domains `ν`.
    pub fn count(&self) -> usize {
        self.components.count()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn retained_edges(&self) -> &[(u32, u32)] {
        &self.retained
    }

    pub fn components(&self) -> &Components {
        &self.components
    }

    /// Vertices whose sign was taken from a neighbor.
    pub fn perturbed(&self) -> &[usize] {
        &self.perturbed
    }

    /// Fraction of edges kept, `|Ẽ_f| / |E|`.
    pub fn p_e(&self) -> f64 {
        self.retained.len() as f64 / self.parent_edges as f64
    }

    /// Independent cycles of the nodal graph, counted by breadth-first search
    /// rather than union-find: edges that close a cycle when first scanned.
    pub fn cycle_rank(&self) -> usize {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.retained {
            adj[a as usize].push(b as usize);
            adj[b as usize].push(a as usize);
        }
        let mut seen = vec![false; self.n];
        let mut tree_edges = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        tree_edges += 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        self.retained.len() - tree_edges
    }

    /// `ν = n - |Ẽ| + β` with `β` from [`NodalGraph::cycle_rank`].
    pub fn euler_count(&self) -> usize {
        self.n + self.cycle_rank() - self.retained.len()
    }

    pub fn statistics(&self) -> DomainStatistics {
        let mut size_counts = vec![0u64; self.n + 1];
        let mut positive = 0;
        let mut signs = Vec::with_capacity(self.count());
        for (&rep, &size) in self
            .components
            .representatives()
            .iter()
            .zip(self.components.sizes())
        {
            size_counts[size as usize] += 1;
            let s = self.signs[rep as usize];
            if s > 0 {
                positive += size as usize;
            }
            signs.push(s);
        }
        while size_counts.len() > 1 && *size_counts.last().unwrap() == 0 {
            size_counts.pop();
        }
        let mut degree = vec![0usize; self.n];
        for &(a, b) in &self.retained {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut valency = vec![0u64; self.d + 1];
        for &x in &degree {
            valency[x] += 1;
        }
        DomainStatistics {
            count: self.count(),
            size_counts,
            domain_signs: signs,
            positive_vertices: positive,
            valency,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainStatistics {
    pub count: usize,
    /// `size_counts[k]` is the number of domains with exactly `k` vertices.
    pub size_counts: Vec<u64>,
    /// Sign of each domain, in representative order.
    pub domain_signs: Vec<i8>,
    pub positive_vertices: usize,
    /// `valency[j]`: vertices with exactly `j` same-sign neighbors.
    pub valency: Vec<u64>,
}

impl DomainStatistics {
    /// `ν_k`, the number of domains of size `k`.
    pub fn nu(&self, k: usize) -> u64 {
        self.size_counts.get(k).copied().unwrap_or(0)
    }

    pub fn smallest_domain(&self) -> usize {
        self.size_counts.iter().position(|&c| c > 0).unwrap_or(0)
    }
}

/// Courant–Davies bound for the eigenvector at 0-based position `i`: the
/// last position of its eigenvalue cluster plus one.
pub fn courant_bound(spectrum: &Spectrum, i: usize, tol: &Tolerances) -> usize {
    let l = spectrum.eigenvalues();
    let slack = tol.eig * spectrum.d() as f64;
    let mut last = i;
    while last + 1 < l.len() && (l[i] - l[last + 1]).abs() <= slack {
        last += 1;
    }
    last + 1
}

/// Smallest domain size allowed for eigenvalue `λ`: `k + 2` for the
/// largest integer `k < λ`, and 1 when `λ ≤ 0`.
pub fn min_domain_size(lambda: f64) -> usize {
    if lambda <= 0.0 {
        return 1;
    }
    let k = lambda.ceil() as usize - 1;
    k + 2
}

/// Checks the structural rules on one eigenvector. Returns the rules that
/// fail, empty when all hold.
pub fn structural_violations(
    stats: &DomainStatistics,
    lambda: f64,
    courant: usize,
    d: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    if stats.count > courant {
        out.push(format!(
            "{} domains exceed the Courant–Davies bound {courant}",
            stats.count
        ));
    }
    if lambda < 0.0 && stats.valency[d] > 0 {
        out.push(format!(
            "{} interior vertices at λ = {lambda}",
            stats.valency[d]
        ));
    }
    if stats.smallest_domain() < min_domain_size(lambda) {
        out.push(format!(
            "domain of size {} below {} at λ = {lambda}",
            stats.smallest_domain(),
            min_domain_size(lambda)
        ));
    }
    out
}

/// One point of the nodal count curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountPoint {
    pub index: usize,
    pub lambda: f64,
    pub nu: usize,
    pub bound: f64,
    pub courant: usize,
}

/// `ν` of every eigenvector in spectrum order, with the lower bound and the
/// Courant–Davies bound.
pub fn nodal_count_curve(
    g: &RegularGraph,
    spectrum: &Spectrum,
    opts: NodalOptions,
) -> Result<Vec<CountPoint>, NodalError> {
    let tol = Tolerances::default();
    let d = g.d();
    (0..spectrum.n())
        .map(|i| {
            let lambda = spectrum.eigenvalues()[i];
            let ng = induce_nodal(g, spectrum.vector(i), opts)?;
            Ok(CountPoint {
                index: i,
                lambda,
                nu: ng.count(),
                bound: nodal_lower_bound(g.n(), d, lambda.clamp(-(d as f64), d as f64))
                    .expect("clamped"),
                courant: courant_bound(spectrum, i, &tol),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> RegularGraph {
        RegularGraph::cycle(4)
    }

    #[test]
    fn constant_vector_on_k4() {
        let g = RegularGraph::complete(4);
        let ng = induce_nodal(&g, &[1.0; 4], NodalOptions::default()).unwrap();
        assert_eq!(ng.count(), 1);
        assert_eq!(ng.p_e(), 1.0);
        assert_eq!(ng.statistics().nu(4), 1);
    }

    #[test]
    fn alternating_on_four_cycle() {
        let ng = induce_nodal(
            &four_cycle(),
            &[1.0, -1.0, 1.0, -1.0],
            NodalOptions::default(),
        )
        .unwrap();
        assert_eq!(ng.count(), 4);
        assert!(ng.retained_edges().is_empty());
        assert_eq!(ng.p_e(), 0.0);
        let s = ng.statistics();
        assert_eq!(s.nu(1), 4);
        assert_eq!(s.valency, vec![4, 0, 0]);
    }

    #[test]
    fn k4_second_eigenvector() {
        let g = RegularGraph::complete(4);
        let ng = induce_nodal(&g, &[1.0, 1.0, 1.0, -3.0], NodalOptions::default()).unwrap();
        assert_eq!(ng.count(), 2);
        let s = ng.statistics();
        assert_eq!((s.nu(1), s.nu(3)), (1, 1));
        assert_eq!(s.positive_vertices, 3);
        assert_eq!(ng.cycle_rank(), 1);
        assert_eq!(ng.euler_count(), 2);
    }

    #[test]
    fn zero_policy() {
        let g = four_cycle();
        let f = [1.0, 0.0, -2.0, 0.5];
        assert!(matches!(
            induce_nodal(&g, &f, NodalOptions::default()),
            Err(NodalError::ZeroComponent { vertex: 1, .. })
        ));
        let ng = induce_nodal(
            &g,
            &f,
            NodalOptions {
                policy: ZeroPolicy::Perturb,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(ng.signs(), &[1, -1, -1, 1]);
        assert_eq!(ng.perturbed(), &[1]);
        assert!(induce_nodal(&g, &[1.0; 3], NodalOptions::default()).is_err());
    }

    #[test]
    fn minimum_sizes() {
        assert_eq!(min_domain_size(-0.5), 1);
        assert_eq!(min_domain_size(0.0), 1);
        assert_eq!(min_domain_size(0.3), 2);
        assert_eq!(min_domain_size(1.0), 2);
        assert_eq!(min_domain_size(1.01), 3);
        assert_eq!(min_domain_size(2.9), 4);
    }

    #[test]
    fn count_curve_on_small_graph() {
        let opts = crate::graph::GenerateOptions {
            require_connected: true,
            ..Default::default()
        };
        let g = crate::graph::generate_regular(60, 3, 1, opts).unwrap();
        let s = crate::spectral::eigendecompose(&g, Default::default()).unwrap();
        let curve = nodal_count_curve(&g, &s, NodalOptions::default()).unwrap();
        assert_eq!(curve[0].nu, 1);
        for p in &curve {
            assert!(p.nu <= p.courant);
            let ng = induce_nodal(&g, s.vector(p.index), NodalOptions::default()).unwrap();
            assert_eq!(ng.euler_count(), ng.count());
            assert!(structural_violations(&ng.statistics(), p.lambda, p.courant, 3).is_empty());
        }
    }
}
