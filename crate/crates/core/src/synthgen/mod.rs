//! Synthetic dataset generators modelled on common graph learning benchmarks.

pub mod models;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, SplitRole, Task};
use crate::rng::{self, Rng as StreamRng};

pub use stats::{avg_path_length, clustering_coefficient, graph_stats, pagerank, per_class_csv, GraphStats};

/// Resampling budget for generators that need connected graphs.
pub const MAX_RETRIES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SmallWorld,
    ScaleFree,
    SbmPattern,
    SbmCluster,
    SynthieLike,
    SyntheticnewLike,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::SmallWorld,
        Family::ScaleFree,
        Family::SbmPattern,
        Family::SbmCluster,
        Family::SynthieLike,
        Family::SyntheticnewLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SmallWorld => "small_world",
            Family::ScaleFree => "scale_free",
            Family::SbmPattern => "sbm_pattern",
            Family::SbmCluster => "sbm_cluster",
            Family::SynthieLike => "synthie_like",
            Family::SyntheticnewLike => "syntheticnew_like",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_").to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family '{s}'")))
    }
}

/// Train/val/test fractions for datasets that ship a predefined split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
}

/// Family-specific generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    SmallWorld {
        /// Inclusive range of the (even) lattice degree.
        k_range: [usize; 2],
        p_range: [f64; 2],
    },
    ScaleFree {
        m_range: [usize; 2],
        triangle_p_range: [f64; 2],
    },
    SbmPattern {
        num_blocks: usize,
        p_in: f64,
        p_out: f64,
        pattern_size: usize,
        p_pattern: f64,
        p_pattern_link: f64,
        num_categories: usize,
    },
    SbmCluster {
        num_blocks: usize,
        p_in: f64,
        p_out: f64,
    },
    SynthieLike {
        num_components: usize,
        template_p: f64,
        variants_per_set: usize,
        edge_remove_p: f64,
        edge_add_p: f64,
        /// Probability that a component of a class-C1 graph comes from S1
        /// (C2 uses the complement).
        majority_p: f64,
        feature_dim: usize,
        vectors_per_set: usize,
        feature_noise: f64,
        /// Use one vector set for both A and B.
        collapse_features: bool,
    },
    SyntheticnewLike {
        edge_p: f64,
        rewirings: [usize; 2],
        permutations: [usize; 2],
        noise_sigma: f64,
    },
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::SmallWorld { .. } => Family::SmallWorld,
            FamilyParams::ScaleFree { .. } => Family::ScaleFree,
            FamilyParams::SbmPattern { .. } => Family::SbmPattern,
            FamilyParams::SbmCluster { .. } => Family::SbmCluster,
            FamilyParams::SynthieLike { .. } => Family::SynthieLike,
            FamilyParams::SyntheticnewLike { .. } => Family::SyntheticnewLike,
        }
    }

    fn probabilities(&self) -> Vec<f64> {
        match self {
            FamilyParams::SmallWorld { p_range, .. } => p_range.to_vec(),
            FamilyParams::ScaleFree { triangle_p_range, .. } => triangle_p_range.to_vec(),
            FamilyParams::SbmPattern {
                p_in,
                p_out,
                p_pattern,
                p_pattern_link,
                ..
            } => vec![*p_in, *p_out, *p_pattern, *p_pattern_link],
            FamilyParams::SbmCluster { p_in, p_out, .. } => vec![*p_in, *p_out],
            FamilyParams::SynthieLike {
                template_p,
                edge_remove_p,
                edge_add_p,
                majority_p,
                ..
            } => vec![*template_p, *edge_remove_p, *edge_add_p, *majority_p],
            FamilyParams::SyntheticnewLike { edge_p, .. } => vec![*edge_p],
        }
    }
}

/// Full description of a synthetic dataset; serialized as `genspec.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub num_graphs: usize,
    pub nodes_per_graph: usize,
    pub seed: u64,
    /// `None` leaves the dataset without predefined splits (cross-validation).
    pub split: Option<SplitSpec>,
    #[serde(flatten)]
    pub params: FamilyParams,
}

impl GenSpec {
    /// Defaults sized like the public benchmarks these families imitate.
    pub fn default_for(family: Family, seed: u64) -> Self {
        let (num_graphs, nodes_per_graph, split, params) = match family {
            Family::SmallWorld => (
                256,
                64,
                None,
                FamilyParams::SmallWorld {
                    k_range: [4, 24],
                    p_range: [0.0, 0.5],
                },
            ),
            Family::ScaleFree => (
                256,
                64,
                None,
                FamilyParams::ScaleFree {
                    m_range: [2, 12],
                    triangle_p_range: [0.0, 1.0],
                },
            ),
            Family::SbmPattern => (
                200,
                100,
                Some(SplitSpec { train: 0.8, val: 0.1 }),
                FamilyParams::SbmPattern {
                    num_blocks: 5,
                    p_in: 0.5,
                    p_out: 0.35,
                    pattern_size: 20,
                    p_pattern: 0.5,
                    p_pattern_link: 0.5,
                    num_categories: 3,
                },
            ),
            Family::SbmCluster => (
                200,
                120,
                Some(SplitSpec { train: 0.8, val: 0.1 }),
                FamilyParams::SbmCluster {
                    num_blocks: 6,
                    p_in: 0.5,
                    p_out: 0.15,
                },
            ),
            Family::SynthieLike => (
                400,
                95,
                None,
                FamilyParams::SynthieLike {
                    num_components: 10,
                    template_p: 0.25,
                    variants_per_set: 10,
                    edge_remove_p: 0.1,
                    edge_add_p: 0.03,
                    majority_p: 0.8,
                    feature_dim: 15,
                    vectors_per_set: 10,
                    feature_noise: 0.1,
                    collapse_features: false,
                },
            ),
            Family::SyntheticnewLike => (
                300,
                100,
                None,
                FamilyParams::SyntheticnewLike {
                    edge_p: 0.04,
                    rewirings: [10, 25],
                    permutations: [10, 25],
                    noise_sigma: 0.25,
                },
            ),
        };
        GenSpec {
            num_graphs,
            nodes_per_graph,
            seed,
            split,
            params,
        }
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_graph < 2 {
            return Err(Error::InvalidArgument("nodes_per_graph must be at least 2".into()));
        }
        if self.num_graphs == 0 {
            return Err(Error::InvalidArgument("num_graphs must be positive".into()));
        }
        if let Some(p) = self.params.probabilities().into_iter().find(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        if let Some(s) = self.split {
            if !(s.train > 0.0 && s.val >= 0.0 && s.train + s.val < 1.0) {
                return Err(Error::InvalidArgument("split fractions must leave a test set".into()));
            }
        }
        match &self.params {
            FamilyParams::SmallWorld { k_range, p_range } => {
                check_range("k_range", k_range[0] as f64, k_range[1] as f64)?;
                check_range("p_range", p_range[0], p_range[1])?;
            }
            FamilyParams::ScaleFree { m_range, triangle_p_range } => {
                check_range("m_range", m_range[0] as f64, m_range[1] as f64)?;
                check_range("triangle_p_range", triangle_p_range[0], triangle_p_range[1])?;
                if m_range[0] == 0 || m_range[1] >= self.nodes_per_graph {
                    return Err(Error::InvalidArgument("m_range must lie in [1, n)".into()));
                }
            }
            FamilyParams::SbmPattern {
                num_blocks,
                pattern_size,
                num_categories,
                ..
            } => {
                if *num_blocks == 0 || *num_categories == 0 || *pattern_size == 0 {
                    return Err(Error::InvalidArgument("blocks, categories and pattern size must be positive".into()));
                }
                if 2 * pattern_size >= self.nodes_per_graph {
                    return Err(Error::InvalidArgument("pattern must be a minority of the graph".into()));
                }
            }
            FamilyParams::SbmCluster { num_blocks, .. } => {
                if *num_blocks == 0 || *num_blocks > self.nodes_per_graph {
                    return Err(Error::InvalidArgument("num_blocks must lie in [1, n]".into()));
                }
            }
            FamilyParams::SynthieLike {
                num_components,
                feature_dim,
                vectors_per_set,
                variants_per_set,
                ..
            } => {
                if *num_components == 0 || *feature_dim == 0 || *vectors_per_set == 0 || *variants_per_set == 0 {
                    return Err(Error::InvalidArgument("synthie counts must be positive".into()));
                }
            }
            FamilyParams::SyntheticnewLike { noise_sigma, .. } => {
                if *noise_sigma < 0.0 {
                    return Err(Error::InvalidArgument("noise_sigma must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}

fn check_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if lo > hi {
        return Err(Error::InvalidArgument(format!("{name}: lower bound above upper bound")));
    }
    Ok(())
}

/// Generates the dataset described by `spec`; bit-identical for equal specs.
pub fn generate(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let ds = match &spec.params {
        FamilyParams::SmallWorld { k_range, p_range } => gen_small_world(spec, *k_range, *p_range)?,
        FamilyParams::ScaleFree { m_range, triangle_p_range } => gen_scale_free(spec, *m_range, *triangle_p_range)?,
        FamilyParams::SbmCluster { num_blocks, p_in, p_out } => gen_sbm_cluster(spec, *num_blocks, *p_in, *p_out)?,
        FamilyParams::SbmPattern { .. } => gen_sbm_pattern(spec)?,
        FamilyParams::SynthieLike { .. } => gen_synthie_like(spec)?,
        FamilyParams::SyntheticnewLike { .. } => gen_syntheticnew_like(spec)?,
    };
    Ok(ds)
}

fn graph_rng(spec: &GenSpec, i: usize) -> StreamRng {
    rng::rng_for(spec.seed, spec.family().name(), &[i as u64])
}

/// Assigns each entity to train/val/test in proportion, after shuffling.
fn predefined_fold(spec: &GenSpec, entities: usize) -> Vec<Vec<SplitRole>> {
    let Some(split) = spec.split else {
        return Vec::new();
    };
    let mut order: Vec<usize> = (0..entities).collect();
    order.shuffle(&mut rng::rng_for(spec.seed, "split", &[]));
    let n_train = (split.train * entities as f64).round() as usize;
    let n_val = (split.val * entities as f64).round() as usize;
    let mut roles = vec![SplitRole::Test; entities];
    for (rank, &e) in order.iter().enumerate() {
        roles[e] = if rank < n_train {
            SplitRole::Train
        } else if rank < n_train + n_val {
            SplitRole::Val
        } else {
            SplitRole::Test
        };
    }
    vec![roles]
}

/// Graph-level labels from ten equal-count bins of a scalar, ranked with ties
/// broken by graph index.
pub fn decile_bins(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut bins = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        bins[i] = rank * 10 / n;
    }
    bins
}

/// `[clustering coefficient, PageRank]` per node.
fn structural_features(g: &Graph) -> Result<Array2<f64>> {
    let cc = clustering_coefficient(g);
    let pr = pagerank(g, stats::PAGERANK_DAMPING, stats::PAGERANK_TOL, stats::PAGERANK_MAX_ITER)?;
    Ok(Array2::from_shape_fn((g.num_nodes(), 2), |(i, j)| if j == 0 { cc[i] } else { pr[i] }))
}

/// Shared tail of the path-length families: sample connected graphs, attach
/// structural features, label by decile of average path length.
fn path_length_dataset<F>(spec: &GenSpec, sample: F) -> Result<Dataset>
where
    F: Fn(&mut StreamRng) -> Vec<(usize, usize)> + Sync,
{
    let n = spec.nodes_per_graph;
    let built: Vec<Result<(Graph, f64)>> = (0..spec.num_graphs)
        .into_par_iter()
        .map(|i| {
            let mut rng = graph_rng(spec, i);
            for _ in 0..=MAX_RETRIES {
                let g = Graph::unattributed(n, sample(&mut rng))?;
                if g.connected_components().len() == 1 {
                    let apl = avg_path_length(&g)?;
                    let x = structural_features(&g)?;
                    return Ok((g.with_features(x)?, apl));
                }
            }
            Err(Error::Numerical(format!(
                "graph {i}: no connected sample after {MAX_RETRIES} retries"
            )))
        })
        .collect();
    let built: Vec<(Graph, f64)> = built.into_iter().collect::<Result<_>>()?;
    let apl: Vec<f64> = built.iter().map(|(_, a)| *a).collect();
    let labels = decile_bins(&apl);
    let graphs = built
        .into_iter()
        .zip(labels)
        .map(|((g, _), y)| g.with_graph_label(y))
        .collect();
    let folds = predefined_fold(spec, spec.num_graphs);
    Dataset::new(spec.family().name(), graphs, Task::GraphClassification, 10, folds)
}

fn gen_small_world(spec: &GenSpec, k_range: [usize; 2], p_range: [f64; 2]) -> Result<Dataset> {
    let n = spec.nodes_per_graph;
    path_length_dataset(spec, |rng| {
        let k = 2 * rng.gen_range(k_range[0].div_ceil(2)..=k_range[1] / 2).max(1);
        let p = rng.gen_range(p_range[0]..=p_range[1]);
        models::watts_strogatz(n, k, p, rng)
    })
}

fn gen_scale_free(spec: &GenSpec, m_range: [usize; 2], tp_range: [f64; 2]) -> Result<Dataset> {
    let n = spec.nodes_per_graph;
    path_length_dataset(spec, |rng| {
        let m = rng.gen_range(m_range[0]..=m_range[1]);
        let p = rng.gen_range(tp_range[0]..=tp_range[1]);
        models::holme_kim(n, m, p, rng)
    })
}

/// Block sizes near `total / blocks`, jittered by ±25%.
fn block_sizes<R: Rng>(total: usize, blocks: usize, rng: &mut R) -> Vec<usize> {
    let mean = total as f64 / blocks as f64;
    let lo = (0.75 * mean).ceil().max(1.0) as usize;
    let hi = ((1.25 * mean).floor() as usize).max(lo);
    (0..blocks).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Shuffled block assignment from block sizes.
fn assignment<R: Rng>(sizes: &[usize], rng: &mut R) -> Vec<usize> {
    let mut a: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat(b).take(s)).collect();
    a.shuffle(rng);
    a
}

fn gen_sbm_cluster(spec: &GenSpec, blocks: usize, p_in: f64, p_out: f64) -> Result<Dataset> {
    let graphs: Vec<Result<Graph>> = (0..spec.num_graphs)
        .into_par_iter()
        .map(|i| {
            let mut rng = graph_rng(spec, i);
            let sizes = block_sizes(spec.nodes_per_graph, blocks, &mut rng);
            let labels = assignment(&sizes, &mut rng);
            let n = labels.len();
            let edges = models::sbm(&labels, p_in, p_out, &mut rng);
            let mut x = Array2::zeros((n, blocks + 1));
            for u in 0..n {
                x[[u, blocks]] = 1.0;
            }
            for b in 0..blocks {
                let members: Vec<usize> = (0..n).filter(|&u| labels[u] == b).collect();
                let &u = members.choose(&mut rng).expect("blocks are nonempty");
                x[[u, blocks]] = 0.0;
                x[[u, b]] = 1.0;
            }
            Graph::new(n, edges, x)?.with_node_labels(labels)
        })
        .collect();
    let graphs: Vec<Graph> = graphs.into_iter().collect::<Result<_>>()?;
    let folds = predefined_fold(spec, spec.num_graphs);
    Dataset::new(spec.family().name(), graphs, Task::InductiveNodeClassification, blocks, folds)
}

fn gen_sbm_pattern(spec: &GenSpec) -> Result<Dataset> {
    let FamilyParams::SbmPattern {
        num_blocks,
        p_in,
        p_out,
        pattern_size,
        p_pattern,
        p_pattern_link,
        num_categories,
    } = spec.params.clone()
    else {
        unreachable!("dispatched on family")
    };
    let graphs: Vec<Result<Graph>> = (0..spec.num_graphs)
        .into_par_iter()
        .map(|i| {
            let mut rng = graph_rng(spec, i);
            let sizes = block_sizes(spec.nodes_per_graph - pattern_size, num_blocks, &mut rng);
            let mut sizes_with_pattern = sizes.clone();
            sizes_with_pattern.push(pattern_size);
            let blocks = assignment(&sizes_with_pattern, &mut rng);
            let n = blocks.len();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    let (a, b) = (blocks[u], blocks[v]);
                    let p = match (a == num_blocks, b == num_blocks) {
                        (true, true) => p_pattern,
                        (true, false) | (false, true) => p_pattern_link,
                        (false, false) if a == b => p_in,
                        _ => p_out,
                    };
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            let mut x = Array2::zeros((n, num_categories));
            for u in 0..n {
                x[[u, rng.gen_range(0..num_categories)]] = 1.0;
            }
            let labels = blocks.iter().map(|&b| usize::from(b == num_blocks)).collect();
            Graph::new(n, edges, x)?.with_node_labels(labels)
        })
        .collect();
    let graphs: Vec<Graph> = graphs.into_iter().collect::<Result<_>>()?;
    let folds = predefined_fold(spec, spec.num_graphs);
    Dataset::new(spec.family().name(), graphs, Task::InductiveNodeClassification, 2, folds)
}

/// Copy of `edges` (on `n` nodes) with each edge dropped with `remove_p` and
/// each non-edge added with `add_p`.
fn edit_edges<R: Rng>(n: usize, edges: &[(usize, usize)], remove_p: f64, add_p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let present: std::collections::HashSet<_> = edges.iter().copied().collect();
    let mut out = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let keep = if present.contains(&(u, v)) {
                !rng.gen_bool(remove_p)
            } else {
                rng.gen_bool(add_p)
            };
            if keep {
                out.push((u, v));
            }
        }
    }
    out
}

fn gen_synthie_like(spec: &GenSpec) -> Result<Dataset> {
    let FamilyParams::SynthieLike {
        num_components,
        template_p,
        variants_per_set,
        edge_remove_p,
        edge_add_p,
        majority_p,
        feature_dim,
        vectors_per_set,
        feature_noise,
        collapse_features,
    } = spec.params.clone()
    else {
        unreachable!("dispatched on family")
    };
    let comp_n = (spec.nodes_per_graph / num_components).max(2);
    let mut trng = rng::rng_for(spec.seed, "synthie_templates", &[]);
    let templates = [
        models::erdos_renyi(comp_n, template_p, &mut trng),
        models::erdos_renyi(comp_n, template_p, &mut trng),
    ];
    // sets[s][v]: edge list of variant v of template s
    let sets: Vec<Vec<Vec<(usize, usize)>>> = templates
        .iter()
        .map(|t| {
            (0..variants_per_set)
                .map(|_| edit_edges(comp_n, t, edge_remove_p, edge_add_p, &mut trng))
                .collect()
        })
        .collect();
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let draw_set = |rng: &mut StreamRng| -> Vec<Array1<f64>> {
        (0..vectors_per_set)
            .map(|_| Array1::from_shape_fn(feature_dim, |_| normal.sample(rng)))
            .collect()
    };
    let set_a = draw_set(&mut trng);
    let set_b = if collapse_features { set_a.clone() } else { draw_set(&mut trng) };
    let noise = Normal::new(0.0, feature_noise.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let graphs: Vec<Result<Graph>> = (0..spec.num_graphs)
        .into_par_iter()
        .map(|i| {
            let mut rng = graph_rng(spec, i);
            let label = i % 4;
            let from_s1_p = if label < 2 { majority_p } else { 1.0 - majority_p };
            // label 0/2: S1 nodes take A vectors; label 1/3: S1 nodes take B
            let s1_gets_a = label % 2 == 0;
            let n = comp_n * num_components;
            let mut edges = Vec::new();
            let mut x = Array2::zeros((n, feature_dim));
            for c in 0..num_components {
                let from_s1 = rng.gen_bool(from_s1_p);
                let set = if from_s1 { &sets[0] } else { &sets[1] };
                let variant = set.choose(&mut rng).expect("nonempty set");
                let base = c * comp_n;
                edges.extend(variant.iter().map(|&(u, v)| (base + u, base + v)));
                let vectors = if from_s1 == s1_gets_a { &set_a } else { &set_b };
                for u in 0..comp_n {
                    let v = vectors.choose(&mut rng).expect("nonempty vector set");
                    for (j, &val) in v.iter().enumerate() {
                        x[[base + u, j]] = val + noise.sample(&mut rng);
                    }
                }
                // random tree over components
                if c > 0 {
                    let other = rng.gen_range(0..c);
                    let u = base + rng.gen_range(0..comp_n);
                    let w = other * comp_n + rng.gen_range(0..comp_n);
                    edges.push((w, u));
                }
            }
            Ok(Graph::new(n, edges, x)?.with_graph_label(label))
        })
        .collect();
    let graphs: Vec<Graph> = graphs.into_iter().collect::<Result<_>>()?;
    let folds = predefined_fold(spec, spec.num_graphs);
    Dataset::new(spec.family().name(), graphs, Task::GraphClassification, 4, folds)
}

fn gen_syntheticnew_like(spec: &GenSpec) -> Result<Dataset> {
    let FamilyParams::SyntheticnewLike {
        edge_p,
        rewirings,
        permutations,
        noise_sigma,
    } = spec.params.clone()
    else {
        unreachable!("dispatched on family")
    };
    let n = spec.nodes_per_graph;
    let mut trng = rng::rng_for(spec.seed, "syntheticnew_base", &[]);
    let base_edges = models::erdos_renyi(n, edge_p, &mut trng);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let base_x: Vec<f64> = (0..n).map(|_| std_normal.sample(&mut trng)).collect();
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let graphs: Vec<Result<Graph>> = (0..spec.num_graphs)
        .into_par_iter()
        .map(|i| {
            let mut rng = graph_rng(spec, i);
            let label = i % 2;
            let mut edges = base_edges.clone();
            let mut present: std::collections::HashSet<_> = edges.iter().copied().collect();
            for _ in 0..rewirings[label] {
                if edges.is_empty() || present.len() >= n * (n - 1) / 2 {
                    break;
                }
                let idx = rng.gen_range(0..edges.len());
                let new = loop {
                    let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    let e = (a.min(b), a.max(b));
                    if a != b && !present.contains(&e) {
                        break e;
                    }
                };
                present.remove(&edges[idx]);
                present.insert(new);
                edges[idx] = new;
            }
            let mut x = base_x.clone();
            let k = permutations[label].min(n);
            let mut chosen: Vec<usize> = (0..n).collect();
            chosen.shuffle(&mut rng);
            chosen.truncate(k);
            let mut vals: Vec<f64> = chosen.iter().map(|&u| x[u]).collect();
            vals.shuffle(&mut rng);
            for (&u, v) in chosen.iter().zip(vals) {
                x[u] = v;
            }
            let x = Array2::from_shape_fn((n, 1), |(u, _)| x[u] + noise.sample(&mut rng));
            Ok(Graph::new(n, edges, x)?.with_graph_label(label))
        })
        .collect();
    let graphs: Vec<Graph> = graphs.into_iter().collect::<Result<_>>()?;
    let folds = predefined_fold(spec, spec.num_graphs);
    Dataset::new(spec.family().name(), graphs, Task::GraphClassification, 2, folds)
}
