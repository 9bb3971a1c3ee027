use thiserror::Error;

use super::{GraphError, RegularGraph};

/// Distance reported by [`RegularGraph::bfs_distances`] for unreachable vertices.
pub const UNREACHABLE: u32 = u32::MAX;

const TABLE_UNREACHABLE: u8 = u8::MAX;

/// All-pairs shortest-path lengths, one byte per ordered pair.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<u8>,
}

impl DistanceTable {
    pub fn compute(g: &RegularGraph) -> Result<Self, GraphError> {
        let n = g.n();
        let mut dist = vec![TABLE_UNREACHABLE; n * n];
        let mut queue = Vec::with_capacity(n);
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            queue.clear();
            queue.push(s as u32);
            row[s] = 0;
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head] as usize;
                head += 1;
                let next = row[u] + 1;
                if next == TABLE_UNREACHABLE {
                    return Err(GraphError::DistanceOverflow(next as u32));
                }
                for &w in g.neighbors(u) {
                    if row[w as usize] == TABLE_UNREACHABLE {
                        row[w as usize] = next;
                        queue.push(w);
                    }
                }
            }
        }
        Ok(DistanceTable { n, dist })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        match self.dist[i * self.n + j] {
            TABLE_UNREACHABLE => None,
            x => Some(x as u32),
        }
    }

    /// Raw row; unreachable entries are `u8::MAX`.
    pub fn row(&self, i: usize) -> &[u8] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> u32 {
        self.dist
            .iter()
            .filter(|&&x| x != TABLE_UNREACHABLE)
            .max()
            .copied()
            .unwrap_or(0) as u32
    }

    /// `M_k` for `k = 0..=diameter`: ordered pairs at each distance.
    pub fn pair_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.diameter() as usize + 1];
        for &x in &self.dist {
            if x != TABLE_UNREACHABLE {
                counts[x as usize] += 1;
            }
        }
        counts
    }
}

/// Number of ordered pairs `(i, j)` with `dist(i, j) = k`.
pub fn k_pair_count(g: &RegularGraph, k: u32) -> u64 {
    k_pairs(g, k).count() as u64
}

/// Ordered pairs at distance exactly `k`, sources ascending and targets
/// ascending within a source.
pub fn k_pairs(g: &RegularGraph, k: u32) -> KPairs<'_> {
    KPairs {
        g,
        k,
        source: 0,
        targets: Vec::new(),
        pos: 0,
    }
}

pub struct KPairs<'a> {
    g: &'a RegularGraph,
    k: u32,
    source: usize,
    targets: Vec<u32>,
    pos: usize,
}

impl Iterator for KPairs<'_> {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        loop {
            if self.pos < self.targets.len() {
                let t = self.targets[self.pos] as usize;
                self.pos += 1;
                return Some((self.source - 1, t));
            }
            if self.source >= self.g.n() {
                return None;
            }
            let dist = self.g.bfs_distances(self.source);
            self.targets.clear();
            self.targets
                .extend((0..dist.len() as u32).filter(|&j| dist[j as usize] == self.k));
            self.pos = 0;
            self.source += 1;
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistanceError {
    #[error("distance matrix has {len} entries for {m} vertices")]
    Shape { m: usize, len: usize },
    #[error("entry ({i}, {j}) differs from ({j}, {i})")]
    Asymmetric { i: usize, j: usize },
    #[error("diagonal entry {0} is nonzero")]
    Diagonal(usize),
    #[error("off-diagonal entry ({i}, {j}) is zero")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("vertices {i} and {j} are not connected")]
    Unreachable { i: usize, j: usize },
    #[error("triangle inequality fails for ({i}, {j}) through {k}")]
    Triangle { i: usize, j: usize, k: usize },
}

/// Pairwise graph distances of an ordered vertex configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    vertices: Vec<usize>,
    dist: Vec<u32>,
    diameter: u32,
}

impl DistanceMatrix {
    pub fn from_graph(g: &RegularGraph, vertices: &[usize]) -> Result<Self, DistanceError> {
        let m = vertices.len();
        let mut dist = vec![0u32; m * m];
        for (a, &u) in vertices.iter().enumerate() {
            let row = g.bfs_distances(u);
            for (b, &v) in vertices.iter().enumerate() {
                if row[v] == UNREACHABLE {
                    return Err(DistanceError::Unreachable { i: a, j: b });
                }
                dist[a * m + b] = row[v];
            }
        }
        Self::from_raw(vertices.to_vec(), dist)
    }

    /// Validates a raw matrix: symmetric, zero exactly on the diagonal, and
    /// satisfying the triangle inequality.
    pub fn from_raw(vertices: Vec<usize>, dist: Vec<u32>) -> Result<Self, DistanceError> {
        let m = vertices.len();
        if dist.len() != m * m {
            return Err(DistanceError::Shape { m, len: dist.len() });
        }
        let at = |i: usize, j: usize| dist[i * m + j];
        for i in 0..m {
            if at(i, i) != 0 {
                return Err(DistanceError::Diagonal(i));
            }
            for j in i + 1..m {
                if at(i, j) != at(j, i) {
                    return Err(DistanceError::Asymmetric { i, j });
                }
                if at(i, j) == 0 {
                    return Err(DistanceError::ZeroOffDiagonal { i, j });
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if at(i, j) > at(i, k) + at(k, j) {
                        return Err(DistanceError::Triangle { i, j, k });
                    }
                }
            }
        }
        let diameter = dist.iter().copied().max().unwrap_or(0);
        Ok(DistanceMatrix {
            vertices,
            dist,
            diameter,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.vertices.len() + j]
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }
}
