mod common;

use std::collections::BTreeSet;

use citnet_core::graph::build_graph;
use citnet_core::native::{read_native, write_native};
use citnet_core::{
    extract_core, intermediates, mark, parse_query, CitationGraph, DrillSession, PubId,
    PublicationRecord, QueryOptions,
};
use proptest::prelude::*;
use std::sync::Arc;

/// Arbitrary records and edges, including self-loops, duplicates, cycles and
/// citations running against time.
fn raw_graph() -> impl Strategy<Value = (Vec<PublicationRecord>, Vec<(PubId, PubId)>)> {
    (1usize..14).prop_flat_map(|n| {
        let years = prop::collection::vec(1990i32..1996, n);
        let edges = prop::collection::vec((1..=n as u32, 1..=n as u32), 0..40);
        (years, edges).prop_map(|(years, edges)| {
            let recs = years
                .iter()
                .enumerate()
                .map(|(i, &y)| PublicationRecord::new(i as u32 + 1, y))
                .collect();
            let edges = edges
                .into_iter()
                .map(|(a, b)| (PubId(a), PubId(b)))
                .collect();
            (recs, edges)
        })
    })
}

fn graph() -> impl Strategy<Value = CitationGraph> {
    raw_graph().prop_map(|(r, e)| build_graph(r, &e).unwrap().0)
}

fn single(id: PubId) -> BTreeSet<PubId> {
    BTreeSet::from([id])
}

const WORDS: [&str; 6] = [
    "friction",
    "wear",
    "nanotribology",
    "lubricant",
    "coating",
    "diamond",
];

fn titled_graph() -> impl Strategy<Value = CitationGraph> {
    prop::collection::vec(prop::collection::vec(0..WORDS.len(), 0..4), 1..12).prop_map(|titles| {
        let recs: Vec<_> = titles
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let title: Vec<&str> = t.iter().map(|&w| WORDS[w]).collect();
                PublicationRecord::new(i as u32 + 1, 2000).with_title(title.join(" "))
            })
            .collect();
        build_graph(recs, &[]).unwrap().0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn built_graphs_are_year_consistent_dags((recs, edges) in raw_graph()) {
        let years: Vec<i32> = recs.iter().map(|r| r.year).collect();
        let (g, report) = build_graph(recs, &edges).unwrap();
        prop_assert_eq!(g.edge_count() + report.dropped.len(), edges.len());
        let kept: Vec<_> = g.edges().collect();
        let unique: BTreeSet<_> = kept.iter().copied().collect();
        prop_assert_eq!(unique.len(), kept.len());
        for (a, b) in kept {
            prop_assert_ne!(a, b);
            prop_assert!(years[a.0 as usize - 1] >= years[b.0 as usize - 1]);
        }
        prop_assert!(g.topological_order().is_some());
    }

    #[test]
    fn internal_scores_sum_to_edge_count(g in graph()) {
        let total: usize = g.ids().map(|id| g.internal_citation_score(id).unwrap()).sum();
        prop_assert_eq!(total, g.edge_count());
    }

    #[test]
    fn predecessors_and_successors_are_dual(g in graph()) {
        let ids: Vec<PubId> = g.ids().collect();
        for &a in &ids {
            let pred = g.predecessors(&single(a), None).unwrap();
            for &b in &ids {
                let succ = g.successors(&single(b), None).unwrap();
                prop_assert_eq!(pred.contains(&b), succ.contains(&a));
            }
        }
    }

    #[test]
    fn reachability_is_the_one_hop_fixpoint(g in graph()) {
        let seeds: BTreeSet<PubId> = g.ids().step_by(3).collect();
        let mut closure = seeds.clone();
        loop {
            let hop = g.predecessors(&closure, Some(1)).unwrap();
            let before = closure.len();
            closure.extend(hop);
            if closure.len() == before {
                break;
            }
        }
        let pred = g.predecessors(&seeds, None).unwrap();
        prop_assert_eq!(&pred, &closure.difference(&seeds).copied().collect());
        let again = g.predecessors(&closure, None).unwrap();
        prop_assert!(again.is_subset(&closure));
    }

    #[test]
    fn cores_shrink_with_k_and_satisfy_degree(g in graph()) {
        let mut prev = extract_core(&g, 0).members;
        prop_assert_eq!(prev.len(), g.node_count());
        for k in 1..5 {
            let core = extract_core(&g, k).members;
            prop_assert!(core.is_subset(&prev));
            let sub = g.induced_subgraph(&core).unwrap();
            for i in 0..sub.node_count() {
                prop_assert!(sub.undirected_degree(i) >= k);
            }
            prev = core;
        }
    }

    #[test]
    fn core_is_union_of_component_cores(g in graph(), k in 1usize..4) {
        let whole = extract_core(&g, k).members;
        let mut union = BTreeSet::new();
        for comp in g.connected_components() {
            let sub = g.induced_subgraph(&comp.into_iter().collect()).unwrap();
            union.extend(extract_core(&sub, k).members);
        }
        prop_assert_eq!(whole, union);
    }

    #[test]
    fn drill_down_is_the_induced_subgraph(g in graph(), pick in prop::collection::vec(any::<bool>(), 14)) {
        let marked: BTreeSet<PubId> = g.ids().zip(&pick).filter(|(_, &p)| p).map(|(id, _)| id).collect();
        prop_assume!(!marked.is_empty());
        let full = Arc::new(g.clone());
        let mut session = DrillSession::new(full.clone());
        let level = session.drill_down(marked.clone(), false).unwrap().clone();
        let want: Vec<_> = g.edges().filter(|(a, b)| marked.contains(a) && marked.contains(b)).collect();
        prop_assert_eq!(level.graph.edges().collect::<Vec<_>>(), want);
        prop_assert_eq!(level.graph.ids().collect::<BTreeSet<_>>(), marked.clone());

        let inter = intermediates(&g, &marked).unwrap();
        prop_assert!(inter.is_disjoint(&marked));
        session.drill_down(marked.clone(), true).ok();
        session.drill_up().unwrap();
        session.drill_up().unwrap();
        prop_assert_eq!(session.graph().as_ref(), full.as_ref());
    }

    #[test]
    fn or_widens_and_and_narrows(g in titled_graph(), a in 0..WORDS.len(), b in 0..WORDS.len()) {
        let opts = QueryOptions::default();
        let q = |s: &str| mark(&g, &parse_query(s, &opts).unwrap());
        let (ma, mb) = (q(WORDS[a]), q(WORDS[b]));
        let or = q(&format!("{} OR {}", WORDS[a], WORDS[b]));
        let and = q(&format!("{} AND {}", WORDS[a], WORDS[b]));
        prop_assert_eq!(&or, &ma.union(&mb).copied().collect());
        prop_assert_eq!(&and, &ma.intersection(&mb).copied().collect());
        let prefix = q(&format!("{}*", &WORDS[a][..3]));
        prop_assert!(ma.is_subset(&prefix));
    }

    #[test]
    fn native_round_trip((recs, edges) in raw_graph()) {
        let (g, report) = build_graph(recs, &edges).unwrap();
        let text = write_native(&g, &report);
        let (g2, r2) = read_native(&text).unwrap();
        prop_assert_eq!(&g2, &g);
        prop_assert_eq!(write_native(&g2, &r2), text);
    }
}
