//! Oracles shared by integration tests.
#![allow(dead_code)]

pub mod gradcheck;

use std::collections::BTreeSet;

/// Rows and column names of the 10×13 profile fixture.
pub fn fixture_profile() -> (Vec<String>, Vec<String>, Vec<Vec<f64>>) {
    let text = include_str!("../fixtures/profile_10x13.csv");
    let mut lines = text.lines();
    let cols: Vec<String> = lines.next().unwrap().split(',').skip(1).map(String::from).collect();
    let mut names = Vec::new();
    let mut rows = Vec::new();
    for l in lines {
        let mut it = l.split(',');
        names.push(it.next().unwrap().to_string());
        rows.push(it.map(|v| v.parse().unwrap()).collect());
    }
    (names, cols, rows)
}

/// Ward merges from the `kodama` crate as (member set, height) pairs.
pub fn kodama_ward(rows: &[Vec<f64>]) -> Vec<(BTreeSet<usize>, f64)> {
    let n = rows.len();
    let mut condensed = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            condensed.push(rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt());
        }
    }
    let dend = kodama::linkage(&mut condensed, n, kodama::Method::Ward);
    let mut members: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    dend.steps()
        .iter()
        .map(|s| {
            let m: BTreeSet<usize> = members[s.cluster1].union(&members[s.cluster2]).copied().collect();
            members.push(m.clone());
            (m, s.dissimilarity)
        })
        .collect()
}

/// Member sets of each merge of a dendrogram in the crate's id convention.
pub fn merge_sets(n: usize, merges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut members: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    merges
        .iter()
        .map(|&(a, b)| {
            let m: BTreeSet<usize> = members[a].union(&members[b]).copied().collect();
            members.push(m.clone());
            m
        })
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Sample covariance matrix of the columns.
pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let p = rows[0].len();
    let means: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    (0..p)
        .map(|a| {
            (0..p)
                .map(|b| rows.iter().map(|r| (r[a] - means[a]) * (r[b] - means[b])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect()
}

/// Erdős–Rényi graph with `dim` uniform features in [-1, 1).
pub fn random_graph(n: usize, p: f64, dim: usize, seed: u64) -> gtaxo::Graph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let x = ndarray::Array2::from_shape_fn((n, dim), |_| rng.gen_range(-1.0..1.0));
    gtaxo::Graph::new(n, edges, x).unwrap()
}

/// Symmetric normalized Laplacian built entry by entry; isolated nodes get a
/// zero row and column.
pub fn normalized_laplacian_oracle(g: &gtaxo::Graph) -> ndarray::Array2<f64> {
    let n = g.num_nodes();
    let mut l = ndarray::Array2::zeros((n, n));
    for u in 0..n {
        let du = g.degree(u) as f64;
        if du > 0.0 {
            l[[u, u]] = 1.0;
        }
        for v in 0..n {
            if g.has_edge(u, v) {
                l[[u, v]] = -1.0 / (du * g.degree(v) as f64).sqrt();
            }
        }
    }
    l
}

/// Whether some pair of `candidates` edges admits a double edge swap that
/// keeps `edges` simple.
pub fn some_legal_swap(edges: &[(usize, usize)], candidates: &[(usize, usize)]) -> bool {
    let present: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    for (i, &(a, b)) in candidates.iter().enumerate() {
        for &(c, d) in &candidates[i + 1..] {
            for (x, y) in [((a, c), (b, d)), ((a, d), (b, c))] {
                if x.0 == x.1 || y.0 == y.1 {
                    continue;
                }
                let (x, y) = (key(x.0, x.1), key(y.0, y.1));
                if x != y && !present.contains(&x) && !present.contains(&y) {
                    return true;
                }
            }
        }
    }
    false
}
