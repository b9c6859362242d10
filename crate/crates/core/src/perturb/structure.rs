use std::collections::{HashSet, VecDeque};

use rand::Rng;

use crate::graph::Graph;

pub fn no_edges(g: &Graph) -> Graph {
    g.with_edges(Vec::new()).expect("empty edge set is valid")
}

pub fn fully_conn(g: &Graph) -> Graph {
    let n = g.num_nodes();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    g.with_edges(edges).expect("complete graph is simple")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewireStatus {
    /// Quota of rewired edges reached.
    Complete,
    /// Some swaps happened, then no legal swap remained among unrewired edges.
    Partial,
    /// Not a single legal swap existed.
    NoLegalSwap,
    TooFewEdges,
}

#[derive(Debug, Clone)]
pub struct RewireOutcome {
    pub graph: Graph,
    pub rewired: usize,
    pub quota: usize,
    pub status: RewireStatus,
    /// Per output edge (in `graph.edges()` order): was it produced by a swap.
    pub rewired_mask: Vec<bool>,
}

/// Above this many unrewired edges the exhaustive fallback is skipped.
const EXHAUSTIVE_POOL_LIMIT: usize = 2000;

fn canon(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Replacement edges for swapping the end nodes of `e` and `f`, if legal.
fn swap_result(
    e: (usize, usize),
    f: (usize, usize),
    cross: bool,
    present: &HashSet<(usize, usize)>,
) -> Option<((usize, usize), (usize, usize))> {
    let (a, b) = e;
    let (c, d) = f;
    let (x, y) = if cross { ((a, d), (b, c)) } else { ((a, c), (b, d)) };
    if x.0 == x.1 || y.0 == y.1 {
        return None;
    }
    let (x, y) = (canon(x.0, x.1), canon(y.0, y.1));
    if x == y || present.contains(&x) || present.contains(&y) {
        return None;
    }
    Some((x, y))
}

/// Every legal `(pool_i, pool_j, cross)` move among unrewired edges.
pub(crate) fn legal_moves(
    edges: &[(usize, usize)],
    pool: &[usize],
    present: &HashSet<(usize, usize)>,
) -> Vec<(usize, usize, bool)> {
    let mut out = Vec::new();
    for i in 0..pool.len() {
        for j in (i + 1)..pool.len() {
            for cross in [false, true] {
                if swap_result(edges[pool[i]], edges[pool[j]], cross, present).is_some() {
                    out.push((i, j, cross));
                }
            }
        }
    }
    out
}

/// Degree-preserving double edge swaps until `⌈fraction·|E|⌉` edges are
/// rewired.
///
/// Pairs are drawn from edges not rewired yet; a successful swap retires both
/// new edges from the pool. Illegal draws (self-loop or duplicate) are
/// rejected. After `20·|E|` consecutive rejections the legal moves among the
/// pool are enumerated and one is drawn from them; rewiring stops early only
/// when none exists.
pub fn rand_rewire<R: Rng>(g: &Graph, rng: &mut R, fraction: f64) -> RewireOutcome {
    let m = g.num_edges();
    let quota = (fraction * m as f64).ceil() as usize;
    if m < 2 {
        return RewireOutcome {
            graph: g.clone(),
            rewired: 0,
            quota,
            status: RewireStatus::TooFewEdges,
            rewired_mask: vec![false; m],
        };
    }
    let mut edges = g.edges().to_vec();
    let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let mut done = vec![false; m];
    let mut pool: Vec<usize> = (0..m).collect();
    let mut rewired = 0;
    let budget = 20 * m;
    let mut rejections = 0;
    let mut stuck = false;

    while rewired < quota && pool.len() >= 2 {
        let i = rng.gen_range(0..pool.len());
        let mut j = rng.gen_range(0..pool.len() - 1);
        if j >= i {
            j += 1;
        }
        let cross = rng.gen_bool(0.5);
        let chosen = match swap_result(edges[pool[i]], edges[pool[j]], cross, &present) {
            Some(r) => Some((i, j, r)),
            None => {
                rejections += 1;
                if rejections < budget {
                    continue;
                }
                if pool.len() > EXHAUSTIVE_POOL_LIMIT {
                    stuck = true;
                    break;
                }
                let moves = legal_moves(&edges, &pool, &present);
                if moves.is_empty() {
                    stuck = true;
                    break;
                }
                let (a, b, c) = moves[rng.gen_range(0..moves.len())];
                let r = swap_result(edges[pool[a]], edges[pool[b]], c, &present).expect("enumerated move is legal");
                Some((a, b, r))
            }
        };
        let (i, j, (x, y)) = chosen.expect("set above");
        rejections = 0;
        let (ei, ej) = (pool[i], pool[j]);
        present.remove(&edges[ei]);
        present.remove(&edges[ej]);
        present.insert(x);
        present.insert(y);
        edges[ei] = x;
        edges[ej] = y;
        done[ei] = true;
        done[ej] = true;
        rewired += 2;
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        pool.swap_remove(hi);
        pool.swap_remove(lo);
    }

    let status = if rewired >= quota {
        RewireStatus::Complete
    } else if rewired == 0 && (stuck || pool.len() < 2) {
        RewireStatus::NoLegalSwap
    } else {
        RewireStatus::Partial
    };
    let mut tagged: Vec<((usize, usize), bool)> = edges.into_iter().zip(done).collect();
    tagged.sort_unstable();
    let (edges, rewired_mask): (Vec<_>, Vec<_>) = tagged.into_iter().unzip();
    RewireOutcome {
        graph: g.with_edges(edges).expect("swaps keep the graph simple"),
        rewired,
        quota,
        status,
        rewired_mask,
    }
}

/// Random fragmentation into `k`-hop balls.
///
/// Seeds are drawn uniformly from unassigned nodes; each fragment is the
/// `k`-hop ball of its seed in the graph induced by the unassigned nodes.
/// Only edges inside a fragment survive.
pub fn frag_k<R: Rng>(g: &Graph, k: usize, rng: &mut R) -> Graph {
    let n = g.num_nodes();
    let mut fragment = vec![usize::MAX; n];
    // unassigned nodes with O(1) removal
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut position: Vec<usize> = (0..n).collect();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut touched = Vec::new();
    let mut fid = 0;
    while !remaining.is_empty() {
        let seed = remaining[rng.gen_range(0..remaining.len())];
        dist[seed] = 0;
        touched.push(seed);
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            if dist[u] == k {
                continue;
            }
            for &v in g.neighbors(u) {
                if fragment[v] == usize::MAX && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    touched.push(v);
                    queue.push_back(v);
                }
            }
        }
        for &v in &touched {
            fragment[v] = fid;
            dist[v] = usize::MAX;
            let p = position[v];
            let last = *remaining.last().expect("v is unassigned");
            remaining.swap_remove(p);
            if last != v {
                position[last] = p;
            }
        }
        touched.clear();
        fid += 1;
    }
    let edges = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| fragment[u] == fragment[v])
        .collect();
    g.with_edges(edges).expect("subset of a simple edge set")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn plain(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::unattributed(n, edges.to_vec()).unwrap()
    }

    fn complete(n: usize) -> Graph {
        fully_conn(&plain(n, &[]))
    }

    #[test]
    fn no_edges_and_fully_conn() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)], ndarray::Array2::from_elem((4, 2), 0.5)).unwrap();
        let e = no_edges(&g);
        assert_eq!(e.num_edges(), 0);
        assert_eq!(e.features(), g.features());
        assert_eq!(no_edges(&e), e);
        let f = fully_conn(&g);
        assert_eq!(f.num_edges(), 6);
        assert_eq!(f.features(), g.features());
        assert_eq!(fully_conn(&f), f);
        assert_eq!(fully_conn(&plain(1, &[])).num_edges(), 0);
    }

    #[test]
    fn two_disjoint_edges_swap_to_one_of_two_outcomes() {
        let g = plain(4, &[(0, 1), (2, 3)]);
        let allowed = [vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]];
        let mut seen = HashSet::new();
        for seed in 0..64 {
            let o = rand_rewire(&g, &mut rng_from_seed(seed), 0.5);
            assert_eq!(o.status, RewireStatus::Complete);
            assert_eq!(o.rewired, 2);
            let e = o.graph.edges().to_vec();
            assert!(allowed.contains(&e), "{e:?}");
            seen.insert(e);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn k4_has_no_legal_swap() {
        let g = complete(4);
        let present: HashSet<_> = g.edges().iter().copied().collect();
        let pool: Vec<usize> = (0..6).collect();
        assert!(legal_moves(g.edges(), &pool, &present).is_empty());
        let o = rand_rewire(&g, &mut rng_from_seed(1), 0.5);
        assert_eq!(o.status, RewireStatus::NoLegalSwap);
        assert_eq!(o.graph, g);
    }

    #[test]
    fn too_few_edges() {
        let g = plain(3, &[(0, 1)]);
        let o = rand_rewire(&g, &mut rng_from_seed(1), 0.5);
        assert_eq!(o.status, RewireStatus::TooFewEdges);
        assert_eq!(o.graph, g);
    }

    #[test]
    fn frag_star_center_first_is_identity() {
        let star = plain(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        // find a seed whose first draw is the centre
        let seed = (0..1000u64)
            .find(|&s| rng_from_seed(s).gen_range(0..6usize) == 0)
            .unwrap();
        assert_eq!(frag_k(&star, 1, &mut rng_from_seed(seed)), star);
    }

    #[test]
    fn frag_large_k_keeps_connected_graph() {
        let p5 = plain(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        for s in 0..10 {
            assert_eq!(frag_k(&p5, 4, &mut rng_from_seed(s)), p5);
        }
    }
}
