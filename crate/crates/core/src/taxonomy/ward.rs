//! Agglomerative clustering with Ward linkage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One agglomeration step. Leaves are `0..n`, the cluster formed by merge
/// `i` is `n + i`, and `a < b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Leaves in left-to-right drawing order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.leaves.len();
        if n == 0 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = &self.merges[id - n];
                stack.push(m.b);
                stack.push(m.a);
            }
        }
        out
    }

    /// Newick string with branch lengths taken from merge heights.
    pub fn newick(&self) -> String {
        let n = self.leaves.len();
        if n == 0 {
            return ";".into();
        }
        let height = |id: usize| if id < n { 0.0 } else { self.merges[id - n].height };
        let mut subtree: Vec<String> = self.leaves.iter().map(|l| newick_label(l)).collect();
        for (i, m) in self.merges.iter().enumerate() {
            let s = format!(
                "({}:{},{}:{})",
                subtree[m.a],
                m.height - height(m.a),
                subtree[m.b],
                m.height - height(m.b)
            );
            debug_assert_eq!(subtree.len(), n + i);
            subtree.push(s);
        }
        format!("{};", subtree.last().expect("nonempty"))
    }
}

fn newick_label(s: &str) -> String {
    s.chars()
        .map(|c| if "()[]:;,' \t\n".contains(c) { '_' } else { c })
        .collect()
}

/// Ward linkage by the Lance–Williams recurrence on squared Euclidean
/// distances; heights are the square roots. Equal increases go to the
/// lowest `(id, id)` pair.
pub fn ward_cluster(labels: &[String], rows: &[Vec<f64>]) -> Result<Dendrogram> {
    let n = rows.len();
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} rows", labels.len())));
    }
    let bad: Vec<String> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_finite())
                .map(move |(j, _)| format!("{}[{j}]", labels[i]))
        })
        .collect();
    if !bad.is_empty() {
        return Err(Error::InputFormat(format!("non-finite entries: {}", bad.join(", "))));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != rows[0].len()) {
        return Err(Error::Shape(format!("row widths {} and {} differ", rows[0].len(), r.len())));
    }
    // d2[i][j] for active cluster ids, indexed by id
    let total = 2 * n.max(1) - 1;
    let mut d2 = vec![vec![0.0; total]; total];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum();
            d2[i][j] = d;
            d2[j][i] = d;
        }
    }
    let mut size = vec![1usize; total];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                let d = d2[i][j];
                if d < best.0 || (d == best.0 && (i, j) < (best.1, best.2)) {
                    best = (d, i, j);
                }
            }
        }
        let (d, a, b) = best;
        let new = n + merges.len();
        size[new] = size[a] + size[b];
        for &k in &active {
            if k == a || k == b {
                continue;
            }
            let t = (size[a] + size[b] + size[k]) as f64;
            let v = ((size[a] + size[k]) as f64 * d2[k][a] + (size[b] + size[k]) as f64 * d2[k][b]
                - size[k] as f64 * d)
                / t;
            d2[k][new] = v;
            d2[new][k] = v;
        }
        active.retain(|&k| k != a && k != b);
        active.push(new);
        merges.push(Merge {
            a,
            b,
            height: d.max(0.0).sqrt(),
            size: size[new],
        });
    }
    Ok(Dendrogram {
        leaves: labels.to_vec(),
        merges,
    })
}

/// Flat clustering into `k` groups by undoing the last `k - 1` merges.
/// Labels are numbered in order of each group's first leaf.
pub fn cut(d: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = d.leaves.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside [1, {n}]")));
    }
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, m) in d.merges.iter().take(n - k).enumerate() {
        let new = n + i;
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = new;
        parent[rb] = new;
    }
    let mut label_of_root = std::collections::HashMap::new();
    Ok((0..n)
        .map(|leaf| {
            let r = find(&mut parent, leaf);
            let next = label_of_root.len();
            *label_of_root.entry(r).or_insert(next)
        })
        .collect())
}
