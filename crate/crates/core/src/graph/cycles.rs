use super::{GraphError, RegularGraph};

pub const DEFAULT_KMAX: usize = 8;

/// Search steps allowed per census by default.
pub const DEFAULT_CENSUS_BUDGET: u64 = 2_000_000_000;

/// Numbers of simple cycles by length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCensus {
    /// `counts[k]` for `k = 0..=kmax`; entries below 3 are always zero.
    pub counts: Vec<u64>,
}

impl CycleCensus {
    pub fn kmax(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    /// Shortest cycle length within the census range.
    pub fn girth(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c > 0)
    }

    /// Poisson mean `(d-1)^k / 2k` of the cycle count in a random d-regular graph.
    pub fn poisson_mean(d: usize, k: usize) -> f64 {
        ((d - 1) as f64).powi(k as i32) / (2 * k) as f64
    }
}

/// Counts every simple cycle of length at most `kmax` exactly once.
///
/// Each cycle is found from its smallest vertex by a depth-first search that
/// stays above that vertex; it is then seen once per orientation.
pub fn cycle_census(g: &RegularGraph, kmax: usize, budget: u64) -> Result<CycleCensus, GraphError> {
    let n = g.n();
    let mut twice = vec![0u64; kmax + 1];
    let mut on_path = vec![false; n];
    let mut steps = 0u64;
    // (vertex, next neighbour slot) frames
    let mut stack: Vec<(u32, u32)> = Vec::with_capacity(kmax + 1);
    for s in 0..n {
        stack.clear();
        stack.push((s as u32, 0));
        on_path[s] = true;
        while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
            let nbrs = g.neighbors(v as usize);
            if *slot as usize == nbrs.len() {
                on_path[v as usize] = false;
                stack.pop();
                continue;
            }
            let w = nbrs[*slot as usize] as usize;
            *slot += 1;
            steps += 1;
            if steps > budget {
                return Err(GraphError::CensusBudget(budget));
            }
            let len = stack.len();
            if w == s {
                if len >= 3 {
                    twice[len] += 1;
                }
            } else if w > s && !on_path[w] && len < kmax {
                on_path[w] = true;
                stack.push((w as u32, 0));
            }
        }
    }
    let counts = twice.into_iter().map(|c| c / 2).collect();
    Ok(CycleCensus { counts })
}
