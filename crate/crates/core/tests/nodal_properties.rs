use speclab_core::graph::{generate_regular, GenerateOptions, RegularGraph};
use speclab_core::nodal::{
    courant_bound, induce_nodal, min_domain_size, p_e_gaussian, p_j_percolation, percolate,
    structural_violations, NodalError, NodalGraph, NodalOptions,
};
use speclab_core::spectral::{eigendecompose, EigenOptions, Spectrum, Tolerances};

fn sample(n: usize, d: usize, seed: u64) -> RegularGraph {
    let opts = GenerateOptions {
        max_attempts: Some(1_000_000),
        ..Default::default()
    };
    generate_regular(n, d, seed, opts).unwrap()
}

/// Rank over GF(2) of the vertex-edge incidence matrix, by elimination on
/// bit-packed edge columns.
fn incidence_rank_gf2(n: usize, edges: &[(u32, u32)]) -> usize {
    let words = n.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = edges
        .iter()
        .map(|&(a, b)| {
            let mut r = vec![0u64; words];
            r[a as usize / 64] ^= 1 << (a % 64);
            r[b as usize / 64] ^= 1 << (b % 64);
            r
        })
        .collect();
    let mut rank = 0;
    for bit in 0..n {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][w] & m != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && r[w] & m != 0 {
                for (x, y) in r.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn nodal_graphs(g: &RegularGraph, s: &Spectrum) -> Vec<(usize, NodalGraph)> {
    (0..s.n())
        .filter_map(
            |i| match induce_nodal(g, s.vector(i), NodalOptions::default()) {
                Ok(ng) => Some((i, ng)),
                Err(NodalError::ZeroComponent { .. }) => None,
                Err(e) => panic!("{e}"),
            },
        )
        .collect()
}

#[test]
fn euler_count_matches_cycle_space_dimension() {
    for (n, d, seed) in [(60, 3, 1), (120, 3, 2), (80, 4, 3), (100, 5, 4)] {
        let g = sample(n, d, seed);
        let s = eigendecompose(&g, EigenOptions::default()).unwrap();
        for (_, ng) in nodal_graphs(&g, &s) {
            let beta = ng.retained_edges().len() - incidence_rank_gf2(n, ng.retained_edges());
            assert_eq!(ng.cycle_rank(), beta);
            assert_eq!(ng.euler_count(), ng.count());
        }
    }
}

#[test]
fn domain_bookkeeping() {
    let g = sample(150, 3, 8);
    let s = eigendecompose(&g, EigenOptions::default()).unwrap();
    for (i, ng) in nodal_graphs(&g, &s) {
        let f = s.vector(i);
        let st = ng.statistics();
        let total: u64 = st
            .size_counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum();
        assert_eq!(total, 150);
        assert_eq!(st.size_counts.iter().sum::<u64>() as usize, st.count);
        assert_eq!(st.domain_signs.len(), st.count);
        assert_eq!(st.valency.iter().sum::<u64>(), 150);
        let half_degree: u64 = st
            .valency
            .iter()
            .enumerate()
            .map(|(j, &c)| j as u64 * c)
            .sum();
        assert_eq!(half_degree, 2 * ng.retained_edges().len() as u64);
        assert_eq!(st.positive_vertices, f.iter().filter(|&&x| x > 0.0).count());
        // kept edges join equal signs, dropped ones opposite signs
        let kept: std::collections::HashSet<_> = ng.retained_edges().iter().copied().collect();
        for &(a, b) in g.edges() {
            let same = (f[a as usize] > 0.0) == (f[b as usize] > 0.0);
            assert_eq!(kept.contains(&(a, b)), same);
        }
        assert_eq!(ng.p_e(), kept.len() as f64 / 225.0);
    }
}

#[test]
fn structural_rules_hold_on_every_eigenvector() {
    let tol = Tolerances::default();
    for (n, d, seed) in [(60, 3, 11), (150, 3, 12), (90, 4, 13), (40, 6, 14)] {
        let g = sample(n, d, seed);
        let s = eigendecompose(&g, EigenOptions::default()).unwrap();
        let graphs = nodal_graphs(&g, &s);
        assert!(graphs.len() >= n - 2);
        for (i, ng) in graphs {
            let l = s.eigenvalues()[i];
            let st = ng.statistics();
            let v = structural_violations(&st, l, courant_bound(&s, i, &tol), d);
            assert!(v.is_empty(), "n {n} i {i} λ {l}: {v:?}");
            assert!(st.smallest_domain() >= min_domain_size(l));
        }
    }
}

#[test]
fn min_domain_size_steps() {
    assert_eq!(min_domain_size(-1.0), 1);
    assert_eq!(min_domain_size(0.0), 1);
    assert_eq!(min_domain_size(0.3), 2);
    assert_eq!(min_domain_size(1.0), 2);
    assert_eq!(min_domain_size(1.01), 3);
    assert_eq!(min_domain_size(2.5), 4);
}

#[test]
fn percolation_keeps_a_binomial_number_of_edges() {
    let g = sample(4000, 3, 21);
    let seeds = 50;
    let mut total = 0usize;
    for seed in 0..seeds {
        let kept = percolate(&g, 0.5, seed).unwrap().retained.len();
        assert!((kept as f64 - 3000.0).abs() <= 3.0 * 1500f64.sqrt() + 1e-9);
        total += kept;
    }
    let mean = total as f64 / seeds as f64;
    assert!((mean - 3000.0).abs() <= 3.0 * (1500.0 / seeds as f64).sqrt());
}

#[test]
fn percolated_valencies_are_binomial() {
    let g = sample(4000, 3, 22);
    let p = 0.4;
    let mut counts = [0u64; 4];
    let reps = 20;
    for seed in 0..reps {
        let perc = percolate(&g, p, 1000 + seed).unwrap();
        let mut deg = vec![0usize; 4000];
        for &(a, b) in &perc.retained {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        for x in deg {
            counts[x] += 1;
        }
    }
    let total = (4000 * reps) as f64;
    for (j, &c) in counts.iter().enumerate() {
        let q = p_j_percolation(p, 3, j).unwrap();
        // neighboring vertices share edges, so allow a wide margin
        let se = (q * (1.0 - q) / total).sqrt();
        assert!((c as f64 / total - q).abs() <= 5.0 * se, "j {j}");
    }
}

/// Away from `λ = 0`, same-sign valencies of eigenvectors are not
/// binomial in `p_e(λ)`: signs of neighbors are correlated through the
/// eigenvalue equation.
#[test]
fn eigenvector_valencies_are_not_binomial() {
    let d = 3;
    let g = sample(2000, d, 31);
    let s = eigendecompose(&g, EigenOptions::default()).unwrap();
    let window = s.window(1.4, 1.6);
    assert!(window.members.len() >= 40);
    let mut counts = [0u64; 4];
    let mut expected = [0.0f64; 4];
    for &i in &window.members {
        let ng = induce_nodal(&g, s.vector(i), NodalOptions::default()).unwrap();
        let st = ng.statistics();
        let pe = p_e_gaussian(s.eigenvalues()[i], d).unwrap();
        for j in 0..=d {
            counts[j] += st.valency[j];
            expected[j] += 2000.0 * p_j_percolation(pe, d, j).unwrap();
        }
    }
    let total = (2000 * window.members.len()) as f64;
    let worst = (0..=d)
        .map(|j| {
            let q = expected[j] / total;
            (counts[j] as f64 / total - q).abs() / (q * (1.0 - q) / total).sqrt()
        })
        .fold(0.0, f64::max);
    assert!(worst > 5.0, "largest contrast {worst} SE");
}
