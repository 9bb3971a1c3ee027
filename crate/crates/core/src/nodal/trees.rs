use std::collections::BTreeMap;

use super::NodalError;
use crate::spectral::spectral_edge;
use crate::stats::{limiting_covariance, mvn_orthant, tree_distance_matrix, MvnOptions};

/// Largest domain size handled by [`expected_small_domains`].
pub const MAX_TREE_SIZE: usize = 6;

/// An unlabeled tree, stored with one representative labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
    /// `|Aut(T)|`
    pub automorphisms: u64,
    /// Canonical parenthesis code (minimum rooted code over all roots).
    pub code: String,
}

impl TreeShape {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.k];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Copies of the shape per vertex of the infinite `d`-regular tree:
    /// rooted embeddings `d!/(d-t_r)! Π_{v≠r} (d-1)!/(d-t_v)!` divided by
    /// `|Aut(T)|`.
    pub fn copies_per_vertex(&self, d: usize) -> f64 {
        let deg = self.degrees();
        let falling = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64);
        let mut r = falling(d, deg[0]);
        for &t in &deg[1..] {
            r *= falling(d - 1, t - 1);
        }
        r / self.automorphisms as f64
    }
}

fn rooted_code(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&u| u != parent)
        .map(|&u| rooted_code(adj, u, v))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

fn canonical_code(k: usize, edges: &[(usize, usize)]) -> String {
    let mut adj = vec![Vec::new(); k];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    (0..k)
        .map(|r| rooted_code(&adj, r, usize::MAX))
        .min()
        .expect("k >= 1")
}

fn prufer_decode(code: &[usize], k: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; k];
    for &x in code {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(k - 1);
    for &x in code {
        let leaf = (0..k).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..k).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Free trees on `k` vertices with maximum degree at most `max_degree`,
/// found by decoding every Prüfer sequence and grouping by canonical code.
/// The automorphism count is `k!` over the number of labeled copies.
pub fn free_trees(k: usize, max_degree: usize) -> Vec<TreeShape> {
    match k {
        0 => return vec![],
        1 => {
            return vec![TreeShape {
                k,
                edges: vec![],
                automorphisms: 1,
                code: "()".into(),
            }]
        }
        _ => {}
    }
    let mut shapes: BTreeMap<String, (Vec<(usize, usize)>, u64)> = BTreeMap::new();
    let len = k - 2;
    let total = k.pow(len as u32);
    let mut code = vec![0usize; len];
    for idx in 0..total {
        let mut x = idx;
        for c in code.iter_mut() {
            *c = x % k;
            x /= k;
        }
        let edges = prufer_decode(&code, k);
        let mut deg = vec![0; k];
        for &(a, b) in &edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        if deg.iter().any(|&t| t > max_degree) {
            continue;
        }
        let key = canonical_code(k, &edges);
        shapes.entry(key).or_insert_with(|| (edges, 0)).1 += 1;
    }
    let kfact: u64 = (1..=k as u64).product();
    shapes
        .into_iter()
        .map(|(code, (edges, labeled))| TreeShape {
            k,
            edges,
            automorphisms: kfact / labeled,
            code,
        })
        .collect()
}

/// Contribution of one tree shape to `ν_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTerm {
    pub shape: TreeShape,
    pub copies_per_vertex: f64,
    /// `2 P(tree vertices > 0, boundary < 0)`
    pub probability: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallDomainPrediction {
    pub k: usize,
    /// Expected number of domains of size `k`.
    pub value: f64,
    pub std_error: f64,
    pub terms: Vec<ShapeTerm>,
}

/// Expected `ν_k(n, λ)` for `k = 1..=kmax` in the tree approximation: each
/// free tree `T` with degrees at most `d` contributes
/// `n · copies(T) · 2 P(T positive, its k(d-2)+2 boundary neighbors negative)`
/// under the limiting covariance of `T` plus boundary.
pub fn expected_small_domains(
    lambda: f64,
    d: usize,
    n: usize,
    kmax: usize,
    opts: MvnOptions,
) -> Result<Vec<SmallDomainPrediction>, NodalError> {
    if kmax > MAX_TREE_SIZE {
        return Err(NodalError::TreeSize {
            k: kmax,
            max: MAX_TREE_SIZE,
        });
    }
    let edge = spectral_edge(d);
    if lambda.abs() >= edge {
        return Err(NodalError::OutsideRange {
            lambda,
            limit: edge,
        });
    }
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let mut terms = Vec::new();
        for shape in free_trees(k, d) {
            let deg = shape.degrees();
            let mut edges = shape.edges.clone();
            let mut m = k;
            for (v, &t) in deg.iter().enumerate() {
                for _ in t..d {
                    edges.push((v, m));
                    m += 1;
                }
            }
            let c = limiting_covariance(tree_distance_matrix(m, &edges), lambda, d)
                .expect("trees are tree configurations");
            let signs: Vec<bool> = (0..m).map(|i| i < k).collect();
            let e = mvn_orthant(c.matrix(), m, &signs, opts)?;
            terms.push(ShapeTerm {
                copies_per_vertex: shape.copies_per_vertex(d),
                probability: 2.0 * e.value,
                std_error: 2.0 * e.std_error,
                shape,
            });
        }
        let nf = n as f64;
        let value = terms
            .iter()
            .map(|t| nf * t.copies_per_vertex * t.probability)
            .sum();
        let var: f64 = terms
            .iter()
            .map(|t| (nf * t.copies_per_vertex * t.std_error).powi(2))
            .sum();
        out.push(SmallDomainPrediction {
            k,
            value,
            std_error: var.sqrt(),
            terms,
        });
    }
    Ok(out)
}
