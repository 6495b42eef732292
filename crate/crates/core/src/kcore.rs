//! Core publications: the k-core of the undirected citation-relation graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::CitationGraph;
use crate::record::PubId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreSet {
    pub k: usize,
    pub members: BTreeSet<PubId>,
}

impl CoreSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Publications with at least `k` citation relations (citing or cited) to
/// other members. Linear-time queue peeling.
pub fn extract_core(graph: &CitationGraph, k: usize) -> CoreSet {
    let n = graph.node_count();
    let mut degree: Vec<usize> = (0..n).map(|i| graph.undirected_degree(i)).collect();
    let mut removed = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| degree[i] < k).collect();
    for &i in &queue {
        removed[i] = true;
    }
    while let Some(u) = queue.pop() {
        for &v in graph.out_neighbors(u).iter().chain(graph.in_neighbors(u)) {
            let v = v as usize;
            if removed[v] {
                continue;
            }
            degree[v] -= 1;
            if degree[v] < k {
                removed[v] = true;
                queue.push(v);
            }
        }
    }
    CoreSet {
        k,
        members: (0..n)
            .filter(|&i| !removed[i])
            .map(|i| graph.id_at(i))
            .collect(),
    }
}

/// Peels by sweeping nodes in the given order, removing any node whose
/// remaining degree is below `k`, until a sweep removes nothing.
///
/// Quadratic; exists to check that the core does not depend on removal order.
pub fn extract_core_in_order(graph: &CitationGraph, k: usize, order: &[PubId]) -> CoreSet {
    let n = graph.node_count();
    let order: Vec<usize> = order.iter().filter_map(|&id| graph.index_of(id)).collect();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for &u in &order {
            if !alive[u] {
                continue;
            }
            let deg = graph
                .out_neighbors(u)
                .iter()
                .chain(graph.in_neighbors(u))
                .filter(|&&v| alive[v as usize])
                .count();
            if deg < k {
                alive[u] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    CoreSet {
        k,
        members: (0..n)
            .filter(|&i| alive[i])
            .map(|i| graph.id_at(i))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::record::PublicationRecord;

    fn graph(n: u32, edges: &[(u32, u32)]) -> CitationGraph {
        // Higher ids are newer so every (hi -> lo) edge is year-consistent.
        let recs: Vec<_> = (1..=n)
            .map(|i| PublicationRecord::new(i, 2000 + i as i32))
            .collect();
        let edges: Vec<_> = edges.iter().map(|&(a, b)| (PubId(a), PubId(b))).collect();
        build_graph(recs, &edges).unwrap().0
    }

    fn set(v: &[u32]) -> BTreeSet<PubId> {
        v.iter().map(|&i| PubId(i)).collect()
    }

    #[test]
    fn triangle_is_its_own_2_core() {
        let g = graph(3, &[(3, 2), (3, 1), (2, 1)]);
        assert_eq!(extract_core(&g, 2).members, set(&[1, 2, 3]));
    }

    #[test]
    fn path_has_empty_2_core() {
        let g = graph(3, &[(3, 2), (2, 1)]);
        assert!(extract_core(&g, 2).is_empty());
    }

    #[test]
    fn zero_threshold_keeps_everything() {
        let g = graph(4, &[(2, 1)]);
        assert_eq!(extract_core(&g, 0).members, set(&[1, 2, 3, 4]));
    }

    #[test]
    fn pendant_is_peeled() {
        // K4 on {1,2,3,4} plus pendant 5 -> 4.
        let g = graph(5, &[(2, 1), (3, 1), (4, 1), (3, 2), (4, 2), (4, 3), (5, 4)]);
        assert_eq!(extract_core(&g, 3).members, set(&[1, 2, 3, 4]));
        assert_eq!(extract_core(&g, 4).members, set(&[]));
        let order: Vec<PubId> = (1..=5).rev().map(PubId).collect();
        assert_eq!(extract_core_in_order(&g, 3, &order), extract_core(&g, 3));
    }
}
