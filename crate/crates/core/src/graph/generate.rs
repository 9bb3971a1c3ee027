use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphError, RegularGraph};

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    /// Pairing attempts before giving up; `None` uses [`default_attempt_budget`].
    pub max_attempts: Option<u64>,
    /// Treat disconnected samples like rejected pairings and draw again.
    pub require_connected: bool,
}

/// `10 * exp((d^2 - 1) / 4)`: ten times the expected number of pairings per
/// simple graph in the configuration model.
pub fn default_attempt_budget(d: usize) -> u64 {
    let d = d as f64;
    let b = 10.0 * ((d * d - 1.0) / 4.0).exp();
    b.ceil().min(u64::MAX as f64) as u64
}

/// Samples a simple d-regular graph with the configuration model.
///
/// Half-edges are matched uniformly at random; a pairing that creates a loop
/// or a repeated edge is thrown away whole and a fresh one is drawn. The
/// matching is built one pair at a time, so a bad pairing is abandoned at its
/// first defect. Accepted graphs are uniform over simple d-regular graphs.
pub fn generate_regular(
    n: usize,
    d: usize,
    seed: u64,
    opts: GenerateOptions,
) -> Result<RegularGraph, GraphError> {
    if d < 2 {
        return Err(GraphError::DegreeTooSmall(d));
    }
    if (n * d) % 2 == 1 {
        return Err(GraphError::OddDegreeSum { n, d });
    }
    if n <= d {
        return Err(GraphError::TooFewVertices { n, d });
    }
    let budget = opts
        .max_attempts
        .unwrap_or_else(|| default_attempt_budget(d));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<u32> = Vec::with_capacity(n * d);
    let mut adj = vec![0u32; n * d];
    let mut fill = vec![0u8; n];

    for _ in 0..budget {
        points.clear();
        points.extend(0..(n * d) as u32);
        fill.fill(0);
        if try_pairing(&mut rng, &mut points, &mut adj, &mut fill, d) {
            for v in 0..n {
                adj[v * d..(v + 1) * d].sort_unstable();
            }
            let g = RegularGraph::from_parts(n, d, adj.clone(), seed);
            if !opts.require_connected || g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(GraphError::BudgetExhausted { attempts: budget })
}

fn try_pairing(
    rng: &mut ChaCha8Rng,
    points: &mut Vec<u32>,
    adj: &mut [u32],
    fill: &mut [u8],
    d: usize,
) -> bool {
    while let Some(a) = points.pop() {
        let k = rng.random_range(0..points.len());
        let b = points.swap_remove(k);
        let (u, v) = (a as usize / d, b as usize / d);
        if u == v {
            return false;
        }
        let nu = &adj[u * d..u * d + fill[u] as usize];
        if nu.contains(&(v as u32)) {
            return false;
        }
        adj[u * d + fill[u] as usize] = v as u32;
        adj[v * d + fill[v] as usize] = u as u32;
        fill[u] += 1;
        fill[v] += 1;
    }
    true
}
