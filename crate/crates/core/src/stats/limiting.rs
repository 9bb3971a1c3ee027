use thiserror::Error;

use crate::covariance::tree_cov_closed;
use crate::graph::{DistanceError, DistanceMatrix, RegularGraph};
use crate::linalg::pivoted_cholesky;
use crate::spectral::solver::{symmetric_eigenvalues, SolverOptions};
use crate::spectral::spectral_edge;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("distance matrix: {0}")]
    Distance(#[from] DistanceError),
    #[error("vertices {0} and {1} are joined by two geodesics; the geodesic hull is not a tree")]
    NotTreeLike(usize, usize),
    #[error("odd cycle through configuration vertices {0}, {1}, {2}")]
    Parity(usize, usize, usize),
    #[error("four-point condition fails for {0:?}")]
    FourPoint([usize; 4]),
    #[error("vertex {vertex} has {count} configuration neighbors, more than d = {d}")]
    Degree {
        vertex: usize,
        count: usize,
        d: usize,
    },
    #[error("configuration is not a star (center followed by its d neighbors)")]
    NotStar,
    #[error("eigenvalue evaluation failed: {0}")]
    Eigen(String),
}

/// How the configuration was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goodness {
    /// Extracted from a graph in which the union of all geodesics between
    /// configuration vertices induces a tree.
    GraphCertified,
    /// A raw matrix passing the tree-metric necessary conditions.
    TreeMetric,
}

/// Checks that `vertices` sit in a cycle-free part of `g`: the set of all
/// vertices on some shortest path between two configuration vertices must
/// induce a tree. Returns the configuration's distance matrix.
pub fn certify_in_graph(
    g: &RegularGraph,
    vertices: &[usize],
) -> Result<DistanceMatrix, ConfigError> {
    let dm = DistanceMatrix::from_graph(g, vertices)?;
    let rows: Vec<Vec<u32>> = vertices.iter().map(|&v| g.bfs_distances(v)).collect();
    let mut hull = vec![false; g.n()];
    for a in 0..vertices.len() {
        for b in a + 1..vertices.len() {
            let dab = dm.get(a, b);
            for w in 0..g.n() {
                if rows[a][w].saturating_add(rows[b][w]) == dab {
                    hull[w] = true;
                }
            }
        }
    }
    for &v in vertices {
        hull[v] = true;
    }
    let members: Vec<usize> = (0..g.n()).filter(|&w| hull[w]).collect();
    let edges: usize = members
        .iter()
        .map(|&w| {
            g.neighbors(w)
                .iter()
                .filter(|&&x| hull[x as usize] && (x as usize) > w)
                .count()
        })
        .sum();
    // connected by construction, so a tree iff |E| = |V| - 1
    if edges + 1 != members.len() {
        let (a, b) = first_cyclic_pair(&dm, &rows, g);
        return Err(ConfigError::NotTreeLike(a, b));
    }
    Ok(dm)
}

/// A pair of configuration indices with more than one geodesic, for error
/// reporting. Falls back to (0, 0) if the cycle only appears in the union.
fn first_cyclic_pair(dm: &DistanceMatrix, rows: &[Vec<u32>], g: &RegularGraph) -> (usize, usize) {
    for a in 0..dm.len() {
        for b in a + 1..dm.len() {
            let dab = dm.get(a, b);
            let on_path = |w: usize| rows[a][w].saturating_add(rows[b][w]) == dab;
            // count geodesics layer by layer
            let mut ways = vec![0u64; g.n()];
            ways[dm.vertices()[a]] = 1;
            let mut layer: Vec<usize> = vec![dm.vertices()[a]];
            for step in 1..=dab {
                let mut next = Vec::new();
                for &u in &layer {
                    for &x in g.neighbors(u) {
                        let x = x as usize;
                        if rows[a][x] == step && on_path(x) {
                            if ways[x] == 0 {
                                next.push(x);
                            }
                            ways[x] += ways[u];
                        }
                    }
                }
                layer = next;
            }
            if ways[dm.vertices()[b]] > 1 {
                return (a, b);
            }
        }
    }
    (0, 0)
}

/// Necessary conditions for `dm` to be realised inside the infinite
/// `d`-regular tree: four-point condition, even triangle perimeters and at
/// most `d` configuration vertices adjacent to any one.
pub fn check_tree_metric(dm: &DistanceMatrix, d: usize) -> Result<(), ConfigError> {
    let m = dm.len();
    let at = |i, j| dm.get(i, j) as u64;
    for i in 0..m {
        let count = (0..m).filter(|&j| at(i, j) == 1).count();
        if count > d {
            return Err(ConfigError::Degree {
                vertex: i,
                count,
                d,
            });
        }
        for j in i + 1..m {
            for k in j + 1..m {
                if (at(i, j) + at(j, k) + at(i, k)) % 2 == 1 {
                    return Err(ConfigError::Parity(i, j, k));
                }
            }
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                for l in k + 1..m {
                    let mut s = [
                        at(i, j) + at(k, l),
                        at(i, k) + at(j, l),
                        at(i, l) + at(j, k),
                    ];
                    s.sort_unstable();
                    if s[1] != s[2] {
                        return Err(ConfigError::FourPoint([i, j, k, l]));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Distance matrix of a small tree on vertices `0..m` given by its edges.
/// Panics if the edges do not form a tree.
pub fn tree_distance_matrix(m: usize, edges: &[(usize, usize)]) -> DistanceMatrix {
    assert_eq!(
        edges.len() + 1,
        m.max(1),
        "a tree on {m} vertices has {} edges",
        m.saturating_sub(1)
    );
    let mut adj = vec![Vec::new(); m];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![u32::MAX; m * m];
    for s in 0..m {
        dist[s * m + s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[s * m + v] == u32::MAX {
                    dist[s * m + v] = dist[s * m + u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    assert!(
        dist.iter().all(|&x| x != u32::MAX),
        "edges do not connect all vertices"
    );
    DistanceMatrix::from_raw((0..m).collect(), dist).expect("tree distances form a metric")
}

/// Center `0` and its `d` neighbors `1..=d`.
pub fn star_distance_matrix(d: usize) -> DistanceMatrix {
    let edges: Vec<(usize, usize)> = (1..=d).map(|j| (0, j)).collect();
    tree_distance_matrix(d + 1, &edges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitingCovariance {
    config: DistanceMatrix,
    lambda: f64,
    d: usize,
    goodness: Goodness,
    /// Row-major `m x m`.
    matrix: Vec<f64>,
    /// Numerical rank; `None` if the matrix is not positive semidefinite.
    rank: Option<usize>,
}

const RANK_TOL: f64 = 1e-10;

/// `C_ij = Cov^tree_{D_ij}(λ)` for a configuration that passes
/// [`check_tree_metric`].
pub fn limiting_covariance(
    config: DistanceMatrix,
    lambda: f64,
    d: usize,
) -> Result<LimitingCovariance, ConfigError> {
    check_tree_metric(&config, d)?;
    Ok(LimitingCovariance::build(
        config,
        lambda,
        d,
        Goodness::TreeMetric,
    ))
}

impl LimitingCovariance {
    /// Configuration taken from `g`, certified by [`certify_in_graph`].
    pub fn from_graph(
        g: &RegularGraph,
        vertices: &[usize],
        lambda: f64,
    ) -> Result<Self, ConfigError> {
        let dm = certify_in_graph(g, vertices)?;
        Ok(Self::build(dm, lambda, g.d(), Goodness::GraphCertified))
    }

    fn build(config: DistanceMatrix, lambda: f64, d: usize, goodness: Goodness) -> Self {
        let m = config.len();
        let kmax = config.diameter() as usize;
        let by_k: Vec<f64> = (0..=kmax).map(|k| tree_cov_closed(lambda, k, d)).collect();
        let mut matrix = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                matrix[i * m + j] = by_k[config.get(i, j) as usize];
            }
        }
        let rank = pivoted_cholesky(&matrix, m, RANK_TOL).ok().map(|p| p.rank);
        LimitingCovariance {
            config,
            lambda,
            d,
            goodness,
            matrix,
            rank,
        }
    }

    pub fn config(&self) -> &DistanceMatrix {
        &self.config
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.config.len()
    }

    pub fn goodness(&self) -> Goodness {
        self.goodness
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.m() + j]
    }

    pub fn rank(&self) -> Option<usize> {
        self.rank
    }

    pub fn is_singular(&self) -> bool {
        self.rank != Some(self.m())
    }

    pub fn min_eigenvalue(&self) -> Result<f64, ConfigError> {
        let v = symmetric_eigenvalues(self.matrix.clone(), self.m(), SolverOptions::default())
            .map_err(|e| ConfigError::Eigen(e.to_string()))?;
        Ok(v.last().copied().unwrap_or(0.0))
    }

    /// `C v` for a vector of length `m`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m();
        (0..m)
            .map(|i| (0..m).map(|j| self.matrix[i * m + j] * v[j]).sum())
            .collect()
    }

    /// Change of variables `(λ f_0 - Σ f_j, f_1, …, f_d)` for a star
    /// configuration (center first).
    pub fn reduce_star(&self) -> Result<ReducedCovariance, ConfigError> {
        let m = self.m();
        let d = self.d;
        if m != d + 1 || (1..m).any(|j| self.config.get(0, j) != 1) {
            return Err(ConfigError::NotStar);
        }
        // T = [[λ, -1, …, -1], [0, I]]
        let mut t = vec![0.0; m * m];
        t[0] = self.lambda;
        for j in 1..m {
            t[j] = -1.0;
            t[j * m + j] = 1.0;
        }
        let tc: Vec<f64> = (0..m * m)
            .map(|idx| {
                (0..m)
                    .map(|k| t[(idx / m) * m + k] * self.matrix[k * m + idx % m])
                    .sum()
            })
            .collect();
        let matrix: Vec<f64> = (0..m * m)
            .map(|idx| {
                (0..m)
                    .map(|k| tc[(idx / m) * m + k] * t[(idx % m) * m + k])
                    .sum()
            })
            .collect();
        let block: Vec<f64> = (1..m)
            .flat_map(|i| (1..m).map(move |j| (i, j)))
            .map(|(i, j)| matrix[i * m + j])
            .collect();
        let eig = symmetric_eigenvalues(block.clone(), d, SolverOptions::default())
            .map_err(|e| ConfigError::Eigen(e.to_string()))?;
        let max_eig = eig[0];
        let min_eig = *eig.last().expect("d >= 1");
        let cross = (1..m).map(|j| matrix[j].abs()).fold(0.0, f64::max);
        Ok(ReducedCovariance {
            lambda: self.lambda,
            d,
            constraint_variance: matrix[0],
            max_cross_covariance: cross,
            matrix,
            neighbor_block: block,
            min_eigenvalue: min_eig,
            max_eigenvalue: max_eig,
        })
    }
}

/// Covariance of `(λ f_0 - Σ_j f_j, f_1, …, f_d)` for the star.
///
/// The first variable has zero variance and zero covariance with the
/// neighbors, so the law of the star is the neighbor block restricted to the
/// hyperplane `λ f_0 = Σ f_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCovariance {
    pub lambda: f64,
    pub d: usize,
    /// Row-major `(d+1) x (d+1)`.
    pub matrix: Vec<f64>,
    pub constraint_variance: f64,
    pub max_cross_covariance: f64,
    /// Row-major `d x d` covariance of the neighbors.
    pub neighbor_block: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl ReducedCovariance {
    /// `max/min` eigenvalue ratio of the neighbor block.
    pub fn condition_number(&self) -> f64 {
        if self.min_eigenvalue <= 0.0 {
            f64::INFINITY
        } else {
            self.max_eigenvalue / self.min_eigenvalue
        }
    }

    /// True when the neighbor block is invertible with condition number
    /// below `1e12` and `λ` is strictly inside the spectral support.
    pub fn is_well_conditioned(&self) -> bool {
        self.lambda.abs() < spectral_edge(self.d) && self.condition_number() < 1e12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_and_single() {
        let c = limiting_covariance(tree_distance_matrix(2, &[(0, 1)]), 1.3, 4).unwrap();
        for (x, y) in c.matrix().iter().zip([1.0, 1.3 / 4.0, 1.3 / 4.0, 1.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        let c = limiting_covariance(tree_distance_matrix(1, &[]), 1.3, 4).unwrap();
        assert_eq!(c.matrix(), &[1.0]);
    }

    #[test]
    fn star_null_vector() {
        let c = limiting_covariance(star_distance_matrix(3), 2.0, 3).unwrap();
        let r = c.apply(&[2.0, -1.0, -1.0, -1.0]);
        assert!(r.iter().all(|x| x.abs() <= 1e-12), "{r:?}");
        assert!(c.is_singular());
        assert_eq!(c.rank(), Some(3));
        assert!((c.get(1, 2) - (4.0 - 3.0) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn reduced_star_at_zero() {
        let c = limiting_covariance(star_distance_matrix(3), 0.0, 3).unwrap();
        let r = c.reduce_star().unwrap();
        assert!(r.constraint_variance.abs() < 1e-14);
        assert!((r.neighbor_block[1] + 0.5).abs() < 1e-15);
        // the all-ones direction has zero variance at λ = 0
        assert!(r.min_eigenvalue.abs() < 1e-12);
        assert!(!r.is_well_conditioned());
    }

    #[test]
    fn reduced_star_inside_support() {
        for d in [3usize, 4, 6] {
            let edge = spectral_edge(d);
            for i in 1..20 {
                let l = -edge + 2.0 * edge * i as f64 / 20.0;
                if l.abs() < 1e-9 {
                    continue;
                }
                let r = limiting_covariance(star_distance_matrix(d), l, d)
                    .unwrap()
                    .reduce_star()
                    .unwrap();
                let df = d as f64;
                let expect_min = (l * l / df).min((df * df - l * l) / (df * (df - 1.0)));
                assert!((r.min_eigenvalue - expect_min).abs() < 1e-12);
                assert!(r.min_eigenvalue > 0.0);
                assert!(r.constraint_variance.abs() < 1e-12 && r.max_cross_covariance < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_configurations() {
        // triangle: odd cycle
        let dm = DistanceMatrix::from_raw(vec![0, 1, 2], vec![0, 1, 1, 1, 0, 1, 1, 1, 0]).unwrap();
        assert!(matches!(
            limiting_covariance(dm, 0.5, 3),
            Err(ConfigError::Parity(0, 1, 2))
        ));
        // 4-cycle
        let dm = DistanceMatrix::from_raw(
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 1, 1, 0, 1, 2, 2, 1, 0, 1, 1, 2, 1, 0],
        )
        .unwrap();
        assert!(matches!(
            limiting_covariance(dm, 0.5, 3),
            Err(ConfigError::FourPoint(_))
        ));
        // star with too many leaves
        assert!(matches!(
            limiting_covariance(star_distance_matrix(4), 0.5, 3),
            Err(ConfigError::Degree { .. })
        ));
        let c = limiting_covariance(tree_distance_matrix(3, &[(0, 1), (1, 2)]), 0.5, 3).unwrap();
        assert!(matches!(c.reduce_star(), Err(ConfigError::NotStar)));
    }

    #[test]
    fn graph_certificate() {
        let g = RegularGraph::cycle(12);
        let c = LimitingCovariance::from_graph(&g, &[0, 1, 3], 0.7).unwrap();
        assert_eq!(c.goodness(), Goodness::GraphCertified);
        assert!((c.get(0, 2) - tree_cov_closed(0.7, 3, 2)).abs() < 1e-15);
        // opposite points of the cycle have two geodesics
        assert!(matches!(
            certify_in_graph(&g, &[0, 6]),
            Err(ConfigError::NotTreeLike(0, 1))
        ));
        let k4 = RegularGraph::complete(4);
        assert!(certify_in_graph(&k4, &[0, 1, 2]).is_err());
    }
}
