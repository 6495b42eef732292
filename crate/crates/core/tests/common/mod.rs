#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use citnet_core::graph::build_graph;
use citnet_core::synthetic::gnp_dag;
use citnet_core::wos::Severity;
use citnet_core::{CitationGraph, Diagnostic, MatchReport, PubId, PublicationRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap()
}

pub fn ids(v: &[u32]) -> BTreeSet<PubId> {
    v.iter().map(|&i| PubId(i)).collect()
}

// ---- golden fixture, fixed by hand from golden10.txt ----

pub const ABSTRACT_ONLY_ID: PubId = PubId(8);
pub const TC17_ID: PubId = PubId(1);
pub const NO_TC_ID: PubId = PubId(4);

#[allow(clippy::too_many_arguments)]
fn rec(
    id: u32,
    authors: &[&str],
    title: &str,
    source: &str,
    j9: &str,
    year: i32,
    vl: &str,
    bp: &str,
    doi: &str,
    abs: &str,
    de: &[&str],
    tc: u64,
    cr: &[&str],
) -> PublicationRecord {
    let some = |s: &str| (!s.is_empty()).then(|| s.to_string());
    let mut r = PublicationRecord::new(id, year)
        .with_authors(authors.iter().copied())
        .with_title(title);
    r.source = source.into();
    r.source_key = j9.to_lowercase();
    r.volume = some(vl);
    r.begin_page = some(bp);
    r.doi = some(doi);
    r.abstract_text = some(abs);
    r.author_keywords = (!de.is_empty()).then(|| de.iter().map(|s| s.to_string()).collect());
    r.external_citation_count = tc;
    r.cited_references = cr.iter().map(|s| s.to_string()).collect();
    let ut = format!("WOS:{:04}", if id >= 10 { id + 1 } else { id });
    r.extra_fields = vec![
        ("PT".into(), "J".into()),
        ("J9".into(), j9.into()),
        ("UT".into(), ut),
    ];
    r
}

pub fn golden_records() -> Vec<PublicationRecord> {
    vec![
        rec(
            1,
            &["Bhushan, B", "Gupta, BK"],
            "Macrotribological studies of diamond-like carbon films",
            "DIAMOND AND RELATED MATERIALS",
            "DIAM RELAT MATER",
            1995,
            "4",
            "100",
            "10.1000/dlc.1995",
            "",
            &["diamond-like carbon", "friction"],
            17,
            &[],
        ),
        rec(
            2,
            &["Grill, A"],
            "Diamond-like carbon: state of the art",
            "DIAMOND AND RELATED MATERIALS",
            "DIAM RELAT MATER",
            1999,
            "8",
            "428",
            "10.1000/grill.1999",
            "",
            &[],
            250,
            &["Bhushan B, 1995, DIAM RELAT MATER, V4, P100"],
        ),
        rec(
            3,
            &["Erdemir, A"],
            "Friction of superlow-friction carbon coatings",
            "SURFACE & COATINGS TECHNOLOGY",
            "SURF COAT TECH",
            2001,
            "146",
            "292",
            "10.1000/erdemir.2001",
            "",
            &["tribology", "coatings"],
            80,
            &[
                "Grill A, 1999, DIAM RELAT MATER, V8, P428, DOI 10.1000/grill.1999",
                "Bhushan B, 1995, DIAM RELAT MATER",
                "Holmberg K, 1994, COATINGS TRIBOLOGY",
            ],
        ),
        rec(
            4,
            &["Liu, H", "Bhushan, B"],
            "Nanotribological characterization of molecularly thick lubricant films",
            "ULTRAMICROSCOPY",
            "ULTRAMICROSCOPY",
            2003,
            "97",
            "321",
            "",
            "",
            &[],
            0,
            &[
                "Erdemir A, 2001, SURF COAT TECH, DOI 10.1000/ERDEMIR.2001",
                "Grill A, 1999",
            ],
        ),
        rec(
            5,
            &["Smith, J"],
            "Wear of hardened steel",
            "WEAR",
            "WEAR",
            2000,
            "240",
            "1",
            "",
            "",
            &["wear"],
            12,
            &["Liu H, 2003, ULTRAMICROSCOPY"],
        ),
        rec(
            6,
            &["Kim, S"],
            "Boundary lubricant additives I",
            "TRIBOLOGY LETTERS",
            "TRIBOL LETT",
            2002,
            "12",
            "45",
            "",
            "",
            &["lubrication"],
            9,
            &[],
        ),
        rec(
            7,
            &["Kim, S"],
            "Boundary lubricant additives II",
            "TRIBOLOGY LETTERS",
            "TRIBOL LETT",
            2002,
            "12",
            "51",
            "",
            "",
            &["lubrication"],
            4,
            &[],
        ),
        rec(
            8,
            &["Park, J"],
            "Adhesion measurements of thin polymer films",
            "JOURNAL OF APPLIED PHYSICS",
            "J APPL PHYS",
            2004,
            "95",
            "2001",
            "",
            "We report nanotribology experiments with an atomic force microscope.",
            &[],
            31,
            &[
                "Kim S, 2002, TRIBOL LETT",
                "Liu H, 2003, ULTRAMICROSCOPY, V97, P321",
            ],
        ),
        rec(
            9,
            &["Zhang, W"],
            "Tribology of ionic liquid lubricants",
            "TRIBOLOGY INTERNATIONAL",
            "TRIBOL INT",
            2005,
            "38",
            "600",
            "10.1000/zhang.2005",
            "",
            &["ionic liquids"],
            5,
            &[
                "Park J, 2004, J APPL PHYS",
                "Zhang W, 2005, TRIBOL INT",
                "Anon, 2001",
                "ANONYMOUS",
            ],
        ),
        rec(
            10,
            &["Wang, L"],
            "A review of tribology at the nanoscale",
            "TRIBOLOGY INTERNATIONAL",
            "TRIBOL INT",
            2006,
            "39",
            "1",
            "10.1000/wang.2006",
            "",
            &[],
            3,
            &[
                "Zhang W, 2005, TRIBOL INT, V38, P600",
                "Bhushan B, 1995, DIAM RELAT MATER, V4, P100, DOI 10.1000/dlc.1995",
            ],
        ),
    ]
}

pub fn golden_diagnostics() -> Vec<Diagnostic> {
    vec![Diagnostic {
        line: 11,
        severity: Severity::Error,
        message: "invalid year: \"n/a\"".into(),
    }]
}

/// Every resolved reference, before graph construction.
pub fn golden_matched_edges() -> Vec<(PubId, PubId)> {
    [
        (2, 1),
        (3, 1),
        (3, 2),
        (4, 2),
        (4, 3),
        (5, 4),
        (8, 4),
        (9, 8),
        (10, 1),
        (10, 9),
    ]
    .iter()
    .map(|&(a, b)| (PubId(a), PubId(b)))
    .collect()
}

/// Smith 2000 citing Liu 2003 runs against time.
pub fn golden_graph_edges() -> Vec<(PubId, PubId)> {
    let mut e = golden_matched_edges();
    e.retain(|&x| x != (PubId(5), PubId(4)));
    e
}

pub fn golden_report() -> MatchReport {
    MatchReport {
        matched: 10,
        matched_by_doi: 3,
        matched_by_source: 6,
        matched_by_author_year: 1,
        unmatched: 2,
        ambiguous: 1,
        unmatchable: 1,
        self_matches: 1,
        duplicates: 0,
    }
}

// ---- random inputs ----

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded DAG with `1..=max_nodes` nodes and a random edge density.
pub fn small_dag(seed: u64, max_nodes: usize) -> CitationGraph {
    let mut r = rng(seed ^ 0x5eed);
    let n = r.random_range(1..=max_nodes);
    let p = r.random_range(0.1..0.7);
    let (recs, edges) = gnp_dag(n, p, seed);
    build_graph(recs, &edges).unwrap().0
}

pub fn fixed_size_dag(seed: u64, n: usize) -> CitationGraph {
    let mut r = rng(seed ^ 0xc105);
    let p = r.random_range(0.15..0.6);
    let (recs, edges) = gnp_dag(n, p, seed);
    build_graph(recs, &edges).unwrap().0
}

pub fn random_subset(graph: &CitationGraph, seed: u64) -> BTreeSet<PubId> {
    let mut r = rng(seed ^ 0x3a7);
    let p = r.random_range(0.1..0.6);
    graph.ids().filter(|_| r.random_bool(p)).collect()
}

// ---- oracles: straight from definitions, no shared code with the library ----

fn edge_list(g: &CitationGraph) -> (Vec<PubId>, Vec<(usize, usize)>) {
    let ids: Vec<PubId> = g.ids().collect();
    let pos: BTreeMap<PubId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let edges = g.edges().map(|(a, b)| (pos[&a], pos[&b])).collect();
    (ids, edges)
}

/// Largest vertex subset whose induced undirected degrees are all ≥ k.
pub fn brute_force_core(g: &CitationGraph, k: usize) -> BTreeSet<PubId> {
    let (ids, edges) = edge_list(g);
    let n = ids.len();
    assert!(n <= 16);
    let mut best = 0u32;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() <= best.count_ones() {
            continue;
        }
        let mut deg = vec![0usize; n];
        for &(a, b) in &edges {
            if mask >> a & 1 == 1 && mask >> b & 1 == 1 {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        if (0..n).all(|v| mask >> v & 1 == 0 || deg[v] >= k) {
            best = mask;
        }
    }
    (0..n)
        .filter(|&v| best >> v & 1 == 1)
        .map(|v| ids[v])
        .collect()
}

/// Interior vertices of every simple directed path between two marked nodes,
/// less the marked nodes themselves.
pub fn brute_force_intermediates(g: &CitationGraph, marked: &BTreeSet<PubId>) -> BTreeSet<PubId> {
    let (ids, edges) = edge_list(g);
    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
    }
    let is_marked: Vec<bool> = ids.iter().map(|id| marked.contains(id)).collect();
    let mut on_path = vec![false; n];

    fn walk(
        v: usize,
        adj: &[Vec<usize>],
        marked: &[bool],
        path: &mut Vec<usize>,
        hit: &mut [bool],
    ) {
        for &w in &adj[v] {
            if path.contains(&w) {
                continue;
            }
            path.push(w);
            if marked[w] {
                for &u in &path[1..path.len() - 1] {
                    hit[u] = true;
                }
            }
            walk(w, adj, marked, path, hit);
            path.pop();
        }
    }

    for s in (0..n).filter(|&s| is_marked[s]) {
        let mut path = vec![s];
        walk(s, &adj, &is_marked, &mut path, &mut on_path);
    }
    (0..n)
        .filter(|&v| on_path[v] && !is_marked[v])
        .map(|v| ids[v])
        .collect()
}

/// Q = Σ_c [ e_c/m − γ (D_c / 2m)² ] evaluated from the edge list.
pub fn quality_from_definition(
    g: &CitationGraph,
    part: &BTreeMap<PubId, usize>,
    gamma: f64,
) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut inside: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for (a, b) in g.edges() {
        let (ca, cb) = (part[&a], part[&b]);
        *degree.entry(ca).or_default() += 1.0;
        *degree.entry(cb).or_default() += 1.0;
        if ca == cb {
            *inside.entry(ca).or_default() += 1.0;
        }
    }
    let clusters: BTreeSet<usize> = part.values().copied().collect();
    clusters
        .iter()
        .map(|c| {
            let e = inside.get(c).copied().unwrap_or(0.0);
            let d = degree.get(c).copied().unwrap_or(0.0);
            e / m - gamma * (d / (2.0 * m)).powi(2)
        })
        .sum()
}

pub fn cluster_count(part: &BTreeMap<PubId, usize>) -> usize {
    part.values().collect::<BTreeSet<_>>().len()
}
