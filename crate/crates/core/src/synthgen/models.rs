//! Random graph models used by the generators. All return canonical edge lists.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

fn to_edges(adj: &[BTreeSet<usize>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (u, nb) in adj.iter().enumerate() {
        out.extend(nb.iter().filter(|&&v| v > u).map(|&v| (u, v)));
    }
    out
}

/// Watts–Strogatz: ring lattice with `k/2` neighbours per side, each lattice
/// edge rewired to a uniform new endpoint with probability `p`.
pub fn watts_strogatz<R: Rng>(n: usize, k: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let half = (k / 2).min(n.saturating_sub(1) / 2);
    let mut adj = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=half {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=half {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || !rng.gen_bool(p) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    to_edges(&adj)
}

/// Holme–Kim growth: preferential attachment with `m` edges per new node,
/// each after the first replaced by a triad-closing edge with probability
/// `p_triangle`.
pub fn holme_kim<R: Rng>(n: usize, m: usize, p_triangle: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let m = m.max(1).min(n.saturating_sub(1).max(1));
    let mut adj = vec![BTreeSet::new(); n];
    let mut repeated: Vec<usize> = (0..m.min(n)).collect();
    for source in m..n {
        // m distinct targets drawn from the degree-weighted list
        let mut targets = Vec::with_capacity(m);
        while targets.len() < m {
            let t = repeated[rng.gen_range(0..repeated.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        let mut target = targets.pop().expect("m >= 1");
        adj[source].insert(target);
        adj[target].insert(source);
        repeated.push(target);
        let mut count = 1;
        while count < m {
            if rng.gen_bool(p_triangle) {
                let hood: Vec<usize> = adj[target]
                    .iter()
                    .copied()
                    .filter(|&w| w != source && !adj[source].contains(&w))
                    .collect();
                if let Some(&w) = hood.choose(rng) {
                    adj[source].insert(w);
                    adj[w].insert(source);
                    repeated.push(w);
                    count += 1;
                    continue;
                }
            }
            let Some(t) = targets.pop() else { break };
            target = t;
            adj[source].insert(target);
            adj[target].insert(source);
            repeated.push(target);
            count += 1;
        }
        repeated.extend(std::iter::repeat(source).take(m));
    }
    to_edges(&adj)
}

/// Stochastic block model over a given block assignment.
pub fn sbm<R: Rng>(blocks: &[usize], p_in: f64, p_out: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let n = blocks.len();
    let mut out = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if blocks[u] == blocks[v] { p_in } else { p_out };
            if rng.gen_bool(p) {
                out.push((u, v));
            }
        }
    }
    out
}

pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    sbm(&vec![0; n], p, p, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::rng::rng_from_seed;

    #[test]
    fn ws_without_rewiring_is_a_ring_lattice() {
        let e = watts_strogatz(10, 4, 0.0, &mut rng_from_seed(0));
        let g = Graph::unattributed(10, e).unwrap();
        assert_eq!(g.num_edges(), 20);
        assert!((0..10).all(|u| g.degree(u) == 4));
    }

    #[test]
    fn ws_rewiring_keeps_edge_count() {
        let e = watts_strogatz(64, 8, 0.3, &mut rng_from_seed(3));
        assert_eq!(Graph::unattributed(64, e).unwrap().num_edges(), 256);
    }

    #[test]
    fn holme_kim_is_connected_and_simple() {
        for s in 0..5 {
            let e = holme_kim(64, 3, 0.5, &mut rng_from_seed(s));
            let g = Graph::unattributed(64, e).unwrap();
            assert_eq!(g.connected_components().len(), 1);
        }
    }

    #[test]
    fn sbm_extremes() {
        let blocks = [0, 0, 0, 1, 1];
        let e = sbm(&blocks, 1.0, 0.0, &mut rng_from_seed(1));
        assert_eq!(e, vec![(0, 1), (0, 2), (1, 2), (3, 4)]);
    }
}
