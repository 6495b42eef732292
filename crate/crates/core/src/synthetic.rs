//! Seeded random citation networks for tests and benchmarks.
//!
//! Node `i` gets id `i + 1` and a year that never decreases with `i`; every
//! edge cites a lower index, so the result is acyclic and year-consistent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{build_graph, CitationGraph};
use crate::record::{PubId, PublicationRecord};

const FIRST_YEAR: i32 = 1960;

fn year_of(i: usize, n: usize, span: usize) -> i32 {
    FIRST_YEAR + (i * span / n.max(1)) as i32
}

fn records(n: usize, span: usize) -> Vec<PublicationRecord> {
    (0..n)
        .map(|i| PublicationRecord::new(i as u32 + 1, year_of(i, n, span)))
        .collect()
}

/// `edges` distinct citations among `nodes` publications spread over 50
/// years. Targets are drawn from a window of recent predecessors so the
/// network has local structure; capped at the number of available pairs.
pub fn random_dag(
    nodes: usize,
    edges: usize,
    seed: u64,
) -> (Vec<PublicationRecord>, Vec<(PubId, PubId)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = (nodes / 20).max(16);
    let cap: usize = (1..nodes).map(|i| i.min(window)).sum();
    let target = edges.min(cap);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(target + target / 8);
    while pairs.len() < target {
        let need = target - pairs.len();
        for _ in 0..need + need / 8 + 1 {
            let i = rng.random_range(1..nodes);
            let j = i - rng.random_range(1..=i.min(window));
            pairs.push((i as u32, j as u32));
        }
        pairs.sort_unstable();
        pairs.dedup();
        if pairs.len() > target {
            // Drop a random surplus rather than the lexicographic tail.
            for k in (1..pairs.len()).rev() {
                let r = rng.random_range(0..=k);
                pairs.swap(k, r);
            }
            pairs.truncate(target);
            pairs.sort_unstable();
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| (PubId(i + 1), PubId(j + 1)))
        .collect();
    (records(nodes, 50), edges)
}

/// Each lower-index pair is an edge with probability `p`. Years span
/// `nodes / 2` values so same-year citations occur.
pub fn gnp_dag(nodes: usize, p: f64, seed: u64) -> (Vec<PublicationRecord>, Vec<(PubId, PubId)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..nodes {
        for j in 0..i {
            if rng.random_bool(p) {
                edges.push((PubId(i as u32 + 1), PubId(j as u32 + 1)));
            }
        }
    }
    (records(nodes, (nodes / 2).max(1)), edges)
}

pub fn random_graph(nodes: usize, edges: usize, seed: u64) -> Result<CitationGraph> {
    let (recs, edges) = random_dag(nodes, edges, seed);
    Ok(build_graph(recs, &edges)?.0)
}

pub fn gnp_graph(nodes: usize, p: f64, seed: u64) -> Result<CitationGraph> {
    let (recs, edges) = gnp_dag(nodes, p, seed);
    Ok(build_graph(recs, &edges)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_edge_count_and_no_drops() {
        let (recs, edges) = random_dag(1000, 5000, 3);
        assert_eq!(edges.len(), 5000);
        let (g, report) = build_graph(recs, &edges).unwrap();
        assert_eq!(report.dropped.len(), 0);
        assert_eq!(g.edge_count(), 5000);
        assert!(g.topological_order().is_some());
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_dag(200, 600, 9), random_dag(200, 600, 9));
        assert_ne!(random_dag(200, 600, 9).1, random_dag(200, 600, 10).1);
    }

    #[test]
    fn saturates_small_graphs() {
        let (_, edges) = random_dag(4, 100, 0);
        assert_eq!(edges.len(), 6);
        let (recs, edges) = gnp_dag(6, 1.0, 0);
        assert_eq!(edges.len(), 15);
        assert_eq!(build_graph(recs, &edges).unwrap().1.dropped.len(), 0);
    }
}
