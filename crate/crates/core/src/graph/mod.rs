//! Simple d-regular graphs: storage, sampling and combinatorial queries.

mod components;
mod cycles;
mod distance;
mod generate;
mod io;

pub use components::{Components, UnionFind};
pub use cycles::{cycle_census, CycleCensus, DEFAULT_CENSUS_BUDGET, DEFAULT_KMAX};
pub use distance::{
    k_pair_count, k_pairs, DistanceError, DistanceMatrix, DistanceTable, KPairs, UNREACHABLE,
};
pub use generate::{default_attempt_budget, generate_regular, GenerateOptions};
pub use io::{read_edge_list, write_edge_list};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no {d}-regular graph on {n} vertices: n*d = {} is odd (handshake parity)", n * d)]
    OddDegreeSum { n: usize, d: usize },
    #[error("a simple {d}-regular graph needs n > d, got n = {n}")]
    TooFewVertices { n: usize, d: usize },
    #[error("degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("pairing produced loops or repeated edges in all {attempts} attempts")]
    BudgetExhausted { attempts: u64 },
    #[error("vertex {vertex} out of range for n = {n}")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) appears more than once")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree}, expected {d}")]
    DegreeMismatch {
        vertex: usize,
        degree: usize,
        d: usize,
    },
    #[error("cycle census exceeded its budget of {0} search steps")]
    CensusBudget(u64),
    #[error("distance {0} does not fit the compact distance table")]
    DistanceOverflow(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An immutable simple d-regular graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    /// `adj[v * d..(v + 1) * d]` is the sorted neighbour list of `v`.
    adj: Vec<u32>,
    edges: Vec<(u32, u32)>,
    seed: Option<u64>,
}

impl RegularGraph {
    /// Builds and validates a graph from an undirected edge list.
    pub fn from_edges(n: usize, d: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if d < 2 {
            return Err(GraphError::DegreeTooSmall(d));
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::InvalidVertex { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            lists[a].push(b as u32);
            lists[b].push(a as u32);
            norm.push((a as u32, b as u32));
        }
        let mut adj = Vec::with_capacity(n * d);
        for (v, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (v.min(w[0] as usize), v.max(w[0] as usize));
                return Err(GraphError::DuplicateEdge(a, b));
            }
            if list.len() != d {
                return Err(GraphError::DegreeMismatch {
                    vertex: v,
                    degree: list.len(),
                    d,
                });
            }
            adj.extend_from_slice(list);
        }
        norm.sort_unstable();
        Ok(RegularGraph {
            n,
            d,
            adj,
            edges: norm,
            seed: None,
        })
    }

    pub(crate) fn from_parts(n: usize, d: usize, adj: Vec<u32>, seed: u64) -> Self {
        let mut edges = Vec::with_capacity(n * d / 2);
        for v in 0..n {
            for &w in &adj[v * d..(v + 1) * d] {
                if (v as u32) < w {
                    edges.push((v as u32, w));
                }
            }
        }
        RegularGraph {
            n,
            d,
            adj,
            edges,
            seed: Some(seed),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Seed passed to [`generate_regular`], if the graph was sampled.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v * self.d..(v + 1) * self.d]
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Dense row-major adjacency matrix.
    pub fn adjacency_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for &(u, v) in &self.edges {
            a[u as usize * n + v as usize] = 1.0;
            a[v as usize * n + u as usize] = 1.0;
        }
        a
    }

    /// Shortest-path distances from `v`; unreachable vertices get [`UNREACHABLE`].
    pub fn bfs_distances(&self, v: usize) -> Vec<u32> {
        assert!(v < self.n, "vertex {v} out of range for n = {}", self.n);
        let mut dist = vec![UNREACHABLE; self.n];
        let mut queue = Vec::with_capacity(self.n);
        dist[v] = 0;
        queue.push(v as u32);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            let next = dist[u] + 1;
            for &w in self.neighbors(u) {
                if dist[w as usize] == UNREACHABLE {
                    dist[w as usize] = next;
                    queue.push(w);
                }
            }
        }
        dist
    }

    pub fn connected_components(&self) -> Components {
        let mut uf = UnionFind::new(self.n);
        for &(u, v) in &self.edges {
            uf.union(u as usize, v as usize);
        }
        uf.components()
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().count() == 1
    }

    /// Complete graph on `n` vertices, degree `n - 1`.
    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        RegularGraph::from_edges(n, n - 1, &edges).expect("complete graph is regular")
    }

    /// Cycle on `n` vertices, degree 2.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        RegularGraph::from_edges(n, 2, &edges).expect("cycle is 2-regular")
    }
}
