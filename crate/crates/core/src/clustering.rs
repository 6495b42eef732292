//! Resolution-controlled clustering of the undirected citation-relation graph.
//!
//! Quality of a partition at resolution `γ`:
//!
//! ```text
//! Q = Σ_c [ e_c / m  −  γ · (D_c / 2m)² ]
//! ```
//!
//! with `m` the number of relations, `e_c` the relations inside cluster `c`
//! and `D_c` the summed degree of `c`. Larger `γ` favours more, smaller
//! clusters. The optimizer alternates node-level local moving with a
//! cluster-merge phase that runs local moving on the aggregated cluster
//! graph, keeping the best of several seeded restarts.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::record::PubId;

/// Largest node count accepted by [`brute_force_cluster`].
pub const BRUTE_FORCE_MAX_NODES: usize = 12;

/// Serialized as the cluster number, or the string `"unassigned"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClusterLabel {
    /// 1-based cluster number; 1 is the largest cluster.
    Cluster(u32),
    Unassigned,
}

impl ClusterLabel {
    pub fn cluster(self) -> Option<u32> {
        match self {
            ClusterLabel::Cluster(c) => Some(c),
            ClusterLabel::Unassigned => None,
        }
    }
}

impl Serialize for ClusterLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ClusterLabel::Cluster(c) => s.serialize_u32(*c),
            ClusterLabel::Unassigned => s.serialize_str("unassigned"),
        }
    }
}

impl<'de> Deserialize<'de> for ClusterLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(u32),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(c) if c > 0 => Ok(ClusterLabel::Cluster(c)),
            Repr::Text(t) if t == "unassigned" => Ok(ClusterLabel::Unassigned),
            _ => Err(serde::de::Error::custom(
                "expected a positive cluster number or \"unassigned\"",
            )),
        }
    }
}

impl fmt::Display for ClusterLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterLabel::Cluster(c) => write!(f, "{c}"),
            ClusterLabel::Unassigned => f.write_str("unassigned"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    pub resolution: f64,
    pub min_cluster_size: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            resolution: crate::DEFAULT_RESOLUTION,
            min_cluster_size: crate::DEFAULT_MIN_CLUSTER_SIZE,
            seed: 0,
            restarts: crate::DEFAULT_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub resolution: f64,
    pub min_cluster_size: usize,
    pub seed: u64,
    pub assignment: BTreeMap<PubId, ClusterLabel>,
    /// Quality with unassigned publications counted as singletons.
    pub quality: f64,
}

impl Clustering {
    pub fn label(&self, id: PubId) -> Option<ClusterLabel> {
        self.assignment.get(&id).copied()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_sizes().len()
    }

    /// Sizes of clusters 1..=n, in cluster order.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = Vec::new();
        for l in self.assignment.values() {
            if let ClusterLabel::Cluster(c) = l {
                let c = *c as usize;
                if sizes.len() < c {
                    sizes.resize(c, 0);
                }
                sizes[c - 1] += 1;
            }
        }
        sizes
    }

    pub fn unassigned(&self) -> impl Iterator<Item = PubId> + '_ {
        self.assignment
            .iter()
            .filter(|(_, l)| **l == ClusterLabel::Unassigned)
            .map(|(id, _)| *id)
    }

    /// Partition in which each unassigned publication is its own cluster.
    pub fn singleton_partition(&self) -> BTreeMap<PubId, usize> {
        let clusters = self.cluster_count();
        let mut next = clusters;
        self.assignment
            .iter()
            .map(|(&id, l)| {
                let c = match l {
                    ClusterLabel::Cluster(c) => *c as usize - 1,
                    ClusterLabel::Unassigned => {
                        next += 1;
                        next - 1
                    }
                };
                (id, c)
            })
            .collect()
    }
}

/// Quality over dense node indices. Cluster terms are summed in order of
/// each cluster's smallest member, so equal partitions give identical bits
/// whatever their labels.
pub(crate) fn quality_of_labels(graph: &CitationGraph, labels: &[usize], gamma: f64) -> f64 {
    let m = graph.edge_count();
    if m == 0 {
        return 0.0;
    }
    let k = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut inner = vec![0u64; k];
    let mut degree = vec![0u64; k];
    let mut first = vec![usize::MAX; k];
    for (i, &l) in labels.iter().enumerate() {
        degree[l] += graph.undirected_degree(i) as u64;
        if first[l] == usize::MAX {
            first[l] = i;
        }
    }
    for (s, t) in graph.edge_indices() {
        if labels[s] == labels[t] {
            inner[labels[s]] += 1;
        }
    }
    let mut order: Vec<usize> = (0..k).filter(|&c| first[c] != usize::MAX).collect();
    order.sort_unstable_by_key(|&c| first[c]);
    let m = m as f64;
    order
        .into_iter()
        .map(|c| {
            let share = degree[c] as f64 / (2.0 * m);
            inner[c] as f64 / m - gamma * share * share
        })
        .sum()
}

/// Quality of `partition` (publication -> cluster key) at resolution `gamma`.
pub fn compute_quality(
    graph: &CitationGraph,
    partition: &BTreeMap<PubId, usize>,
    gamma: f64,
) -> Result<f64> {
    let mut keys: Vec<usize> = Vec::with_capacity(graph.node_count());
    for id in graph.ids() {
        keys.push(*partition.get(&id).ok_or(Error::IncompletePartition(id))?);
    }
    Ok(quality_of_labels(graph, &dense_labels(&keys), gamma))
}

/// Relabels arbitrary keys to 0.. in order of first appearance.
fn dense_labels(keys: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    keys.iter()
        .map(|&k| {
            let next = map.len();
            *map.entry(k).or_insert(next)
        })
        .collect()
}

/// Weighted undirected graph the optimizer works on; level 0 is the
/// relation graph itself, higher levels have one node per cluster.
struct Level {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn len(&self) -> usize {
        self.degree.len()
    }

    fn from_graph(graph: &CitationGraph) -> Level {
        let n = graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(2 * graph.edge_count());
        for i in 0..n {
            neighbors.extend_from_slice(graph.out_neighbors(i));
            neighbors.extend_from_slice(graph.in_neighbors(i));
            offsets.push(neighbors.len());
        }
        let weights = vec![1.0; neighbors.len()];
        let degree = (0..n).map(|i| graph.undirected_degree(i) as f64).collect();
        Level {
            offsets,
            neighbors,
            weights,
            degree,
        }
    }

    /// Collapses each cluster of `labels` (dense, `0..k`) into one node.
    fn aggregate(&self, labels: &[u32], k: usize) -> Level {
        let mut pairs: Vec<(u32, u32, f64)> = Vec::new();
        let mut degree = vec![0.0; k];
        for i in 0..self.len() {
            let li = labels[i];
            degree[li as usize] += self.degree[i];
            for e in self.offsets[i]..self.offsets[i + 1] {
                let lj = labels[self.neighbors[e] as usize];
                if li != lj {
                    pairs.push((li, lj, self.weights[e]));
                }
            }
        }
        pairs.sort_unstable_by_key(|&(a, b, _)| (a, b));
        let mut offsets = vec![0usize; k + 1];
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        let mut iter = pairs.into_iter().peekable();
        while let Some((a, b, w)) = iter.next() {
            let mut w = w;
            while let Some(&(a2, b2, w2)) = iter.peek() {
                if (a2, b2) != (a, b) {
                    break;
                }
                w += w2;
                iter.next();
            }
            neighbors.push(b);
            weights.push(w);
            offsets[a as usize + 1] += 1;
        }
        for i in 0..k {
            offsets[i + 1] += offsets[i];
        }
        Level {
            offsets,
            neighbors,
            weights,
            degree,
        }
    }
}

/// Scaled move gains below this are treated as no improvement.
const GAIN_EPS: f64 = 1e-10;

/// Moves single nodes to the neighbouring (or an empty) cluster with the
/// best quality gain. Every node is visited once in random order; after a
/// move, neighbours outside the new cluster are queued again. Returns
/// whether any node moved.
fn local_moving(
    level: &Level,
    labels: &mut [u32],
    m: f64,
    gamma: f64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let n = level.len();
    let mut total = vec![0.0; n];
    let mut size = vec![0usize; n];
    for i in 0..n {
        total[labels[i] as usize] += level.degree[i];
        size[labels[i] as usize] += 1;
    }
    let mut empty: Vec<u32> = (0..n as u32).filter(|&c| size[c as usize] == 0).collect();
    let mut link = vec![0.0; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<usize> = order.into();
    let mut queued = vec![true; n];
    let scale = gamma / (2.0 * m);
    let mut any = false;

    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        let old = labels[i];
        let d = level.degree[i];
        let (lo, hi) = (level.offsets[i], level.offsets[i + 1]);
        for e in lo..hi {
            let c = labels[level.neighbors[e] as usize];
            if link[c as usize] == 0.0 {
                touched.push(c);
            }
            link[c as usize] += level.weights[e];
        }
        total[old as usize] -= d;
        size[old as usize] -= 1;

        // Gains are scaled by m; the constant −γd²/4m² term is dropped.
        let mut best = old;
        let mut best_gain = link[old as usize] - scale * d * total[old as usize];
        for &c in &touched {
            let gain = link[c as usize] - scale * d * total[c as usize];
            if gain > best_gain + GAIN_EPS {
                best = c;
                best_gain = gain;
            }
        }
        if size[old as usize] > 0 && 0.0 > best_gain + GAIN_EPS {
            best = empty
                .pop()
                .expect("an empty cluster exists while a cluster holds two nodes");
        }
        for &c in &touched {
            link[c as usize] = 0.0;
        }
        touched.clear();

        total[best as usize] += d;
        size[best as usize] += 1;
        if best != old {
            if size[old as usize] == 0 {
                empty.push(old);
            }
            labels[i] = best;
            any = true;
            for e in lo..hi {
                let j = level.neighbors[e] as usize;
                if !queued[j] && labels[j] != best {
                    queued[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    any
}

/// Renumbers labels to `0..k` in order of first occurrence; returns `k`.
fn compact(labels: &mut [u32]) -> usize {
    let mut map = vec![u32::MAX; labels.len()];
    let mut next = 0u32;
    for l in labels.iter_mut() {
        if map[*l as usize] == u32::MAX {
            map[*l as usize] = next;
            next += 1;
        }
        *l = map[*l as usize];
    }
    next as usize
}

const MAX_ROUNDS: usize = 64;

/// Rounds of local moving on the base graph, each followed by local moving
/// on successively coarser cluster graphs. Stops after a round in which no
/// node at any level moved.
fn optimize(base: &Level, m: f64, gamma: f64, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u32> = (0..base.len() as u32).collect();
    for _ in 0..MAX_ROUNDS {
        let mut changed = local_moving(base, &mut labels, m, gamma, &mut rng);
        let mut k = compact(&mut labels);
        let mut level = base.aggregate(&labels, k);
        loop {
            let mut coarse: Vec<u32> = (0..k as u32).collect();
            if !local_moving(&level, &mut coarse, m, gamma, &mut rng) {
                break;
            }
            changed = true;
            k = compact(&mut coarse);
            for l in labels.iter_mut() {
                *l = coarse[*l as usize];
            }
            level = level.aggregate(&coarse, k);
        }
        if !changed {
            break;
        }
    }
    compact(&mut labels);
    labels
}

/// Heuristic quality maximization followed by dissolution of clusters
/// smaller than `min_cluster_size`.
///
/// Restarts run in parallel with seeds `seed, seed + 1, ...`; the best
/// quality wins, ties going to the lowest seed, so the result depends only
/// on the inputs.
pub fn cluster(graph: &CitationGraph, options: &ClusterOptions) -> Clustering {
    let n = graph.node_count();
    let gamma = options.resolution;
    let restarts = options.restarts.max(1);

    let labels: Vec<usize> = if graph.edge_count() == 0 {
        (0..n).collect()
    } else {
        let base = Level::from_graph(graph);
        let m = graph.edge_count() as f64;
        let runs: Vec<(f64, usize, Vec<u32>)> = (0..restarts)
            .into_par_iter()
            .map(|r| {
                let labels = optimize(&base, m, gamma, options.seed.wrapping_add(r as u64));
                let dense: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
                (quality_of_labels(graph, &dense, gamma), r, labels)
            })
            .collect();
        let best = runs
            .into_iter()
            .reduce(|a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            })
            .expect("at least one restart");
        best.2.into_iter().map(|l| l as usize).collect()
    };

    let assignment = finalize(graph, &labels, options.min_cluster_size);
    let mut clustering = Clustering {
        resolution: gamma,
        min_cluster_size: options.min_cluster_size,
        seed: options.seed,
        assignment,
        quality: 0.0,
    };
    let partition = clustering.singleton_partition();
    let keys: Vec<usize> = graph.ids().map(|id| partition[&id]).collect();
    clustering.quality = quality_of_labels(graph, &dense_labels(&keys), gamma);
    clustering
}

/// Orders clusters by size (desc) then smallest member, dissolving small ones.
fn finalize(
    graph: &CitationGraph,
    labels: &[usize],
    min_size: usize,
) -> BTreeMap<PubId, ClusterLabel> {
    let k = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut size = vec![0usize; k];
    let mut first = vec![usize::MAX; k];
    for (i, &l) in labels.iter().enumerate() {
        size[l] += 1;
        first[l] = first[l].min(i);
    }
    let mut order: Vec<usize> = (0..k).filter(|&c| size[c] > 0).collect();
    order.sort_unstable_by_key(|&c| (std::cmp::Reverse(size[c]), first[c]));
    let mut number = vec![ClusterLabel::Unassigned; k];
    let mut next = 1u32;
    for c in order {
        if size[c] >= min_size.max(1) {
            number[c] = ClusterLabel::Cluster(next);
            next += 1;
        }
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (graph.id_at(i), number[l]))
        .collect()
}

/// Calls `visit` with every restricted growth string of length `n`, in
/// lexicographic order; each string is one set partition.
fn for_each_partition(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut rgs = vec![0usize; n];
    // prefix_max[i] = max(rgs[..i])
    let mut prefix_max = vec![0usize; n + 1];
    visit(&rgs);
    loop {
        let mut i = n;
        loop {
            if i <= 1 {
                return;
            }
            i -= 1;
            if rgs[i] <= prefix_max[i] {
                break;
            }
        }
        rgs[i] += 1;
        prefix_max[i + 1] = prefix_max[i].max(rgs[i]);
        for j in i + 1..n {
            rgs[j] = 0;
            prefix_max[j + 1] = prefix_max[j];
        }
        visit(&rgs);
    }
}

/// Exhaustive search over all set partitions; the first partition (in
/// restricted-growth-string order) reaching the maximum quality wins.
pub fn brute_force_cluster(
    graph: &CitationGraph,
    gamma: f64,
) -> Result<(BTreeMap<PubId, usize>, f64)> {
    let n = graph.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooManyNodes {
            max: BRUTE_FORCE_MAX_NODES,
            got: n,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_partition(n, |rgs| {
        let q = quality_of_labels(graph, rgs, gamma);
        if best.as_ref().map_or(true, |b| q > b.1) {
            best = Some((rgs.to_vec(), q));
        }
    });
    let (labels, q) = best.expect("at least the all-in-one partition");
    Ok((graph.ids().zip(labels).collect(), q))
}
