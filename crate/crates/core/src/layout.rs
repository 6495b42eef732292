//! Historiograph layout: one row per publication year (oldest on top),
//! horizontal positions pulled together along citation edges.
//!
//! Horizontal positions minimize the squared edge length
//! `Σ (x_citing − x_cited)²` by neighbour-mean sweeps. After each sweep the
//! nodes of every row are re-spaced to keep at least `d_min` apart (the
//! least-squares projection onto the ordered, separated configurations).
//! The output is affinely normalized to `[0, 1]`.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::record::PubId;

/// The `n` most cited publications (internal score), ties going to the
/// older publication and then the smaller id. Returned in that order.
pub fn select_display(graph: &CitationGraph, n: usize) -> Vec<PubId> {
    let mut idx: Vec<usize> = (0..graph.node_count()).collect();
    idx.sort_unstable_by_key(|&i| {
        (
            std::cmp::Reverse(graph.in_neighbors(i).len()),
            graph.year_at(i),
            graph.id_at(i),
        )
    });
    idx.truncate(n);
    idx.into_iter().map(|i| graph.id_at(i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    /// Minimum same-row separation; `None` means `1 / (largest row size)`.
    pub d_min: Option<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            d_min: None,
            iterations: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedNode {
    pub id: PubId,
    pub label: String,
    pub year: i32,
    pub layer: usize,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    /// In the order the display set was given.
    pub nodes: Vec<PlacedNode>,
    /// Displayed edges `(citing, cited)`, sorted.
    pub edges: Vec<(PubId, PubId)>,
    /// Year of each layer, ascending.
    pub layer_years: Vec<i32>,
    pub d_min: f64,
    pub initial_stress: f64,
    pub stress: f64,
}

impl LayoutResult {
    pub fn node(&self, id: PubId) -> Option<&PlacedNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn positions(&self) -> BTreeMap<PubId, &PlacedNode> {
        self.nodes.iter().map(|n| (n.id, n)).collect()
    }
}

fn stress(x: &[f64], edges: &[(usize, usize)]) -> f64 {
    edges.iter().map(|&(s, t)| (x[s] - x[t]).powi(2)).sum()
}

/// Spans below this collapse to a single column at 0.5.
const DEGENERATE_SPAN: f64 = 1e-12;

fn normalized(x: &[f64]) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Also catches NaN spans.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(hi - lo > DEGENERATE_SPAN) {
        return vec![0.5; x.len()];
    }
    x.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Least-squares projection of ordered targets `y` onto
/// `{ x : x[j+1] − x[j] ≥ d, 0 ≤ x[0], x[last] ≤ 1 }`.
fn separate(y: &[f64], d: f64) -> Vec<f64> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    // Substitute z[j] = x[j] − j·d: monotone regression (pool adjacent violators).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (j, &v) in y.iter().enumerate() {
        let mut sum = v - j as f64 * d;
        let mut count = 1;
        while let Some(&(s, c)) = blocks.last() {
            if s / c as f64 > sum / count as f64 {
                sum += s;
                count += c;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push((sum, count));
    }
    let hi = (1.0 - (n - 1) as f64 * d).max(0.0);
    let mut out = Vec::with_capacity(n);
    for (sum, count) in blocks {
        let z = (sum / count as f64).clamp(0.0, hi);
        for _ in 0..count {
            let j = out.len();
            out.push(z + j as f64 * d);
        }
    }
    out
}

/// Lays out the `display` publications of `graph`.
pub fn layout(
    graph: &CitationGraph,
    display: &[PubId],
    params: &LayoutParams,
) -> Result<LayoutResult> {
    let mut seen = BTreeSet::new();
    let mut nodes: Vec<usize> = Vec::with_capacity(display.len());
    for &id in display {
        let i = graph.index_of(id).ok_or(Error::UnknownId(id))?;
        if seen.insert(id) {
            nodes.push(i);
        }
    }
    let local: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let n = nodes.len();

    let layer_years: Vec<i32> = nodes
        .iter()
        .map(|&i| graph.year_at(i))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let layer_of: Vec<usize> = nodes
        .iter()
        .map(|&i| layer_years.binary_search(&graph.year_at(i)).unwrap())
        .collect();
    // Each row starts ordered by id.
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); layer_years.len()];
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_unstable_by_key(|&k| graph.id_at(nodes[k]));
    for k in by_id {
        rows[layer_of[k]].push(k);
    }

    let occupancy = rows.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let d_min = params.d_min.unwrap_or(1.0 / occupancy as f64);
    if !(d_min.is_finite() && d_min > 0.0) {
        return Err(Error::LayoutParams(format!(
            "d_min must be positive, got {d_min}"
        )));
    }
    for (row, year) in rows.iter().zip(&layer_years) {
        if row.len() > 1 && (row.len() - 1) as f64 * d_min > 1.0 + 1e-12 {
            return Err(Error::LayerOverflow {
                year: *year,
                count: row.len(),
                d_min,
            });
        }
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &i) in nodes.iter().enumerate() {
        for &t in graph.out_neighbors(i) {
            if let Some(&kt) = local.get(&(t as usize)) {
                edges.push((k, kt));
                adj[k].push(kt);
                adj[kt].push(k);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut x = vec![0.0; n];
    for row in &rows {
        let len = row.len() as f64;
        let targets: Vec<f64> = (0..row.len())
            .map(|j| (j as f64 + 0.5 + rng.random_range(-0.25..0.25)) / len)
            .collect();
        for (&k, v) in row.iter().zip(separate(&targets, d_min)) {
            x[k] = v;
        }
    }

    let initial = normalized(&x);
    let initial_stress = stress(&initial, &edges);
    let mut best = (initial_stress, initial);

    let sweep: Vec<usize> = rows.iter().flatten().copied().collect();
    for _ in 0..params.iterations {
        let before = x.clone();
        for &k in &sweep {
            if !adj[k].is_empty() {
                x[k] = adj[k].iter().map(|&j| x[j]).sum::<f64>() / adj[k].len() as f64;
            }
        }
        for row in rows.iter_mut() {
            // Keep the previous order for ties so the sort is stable.
            row.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
            let targets: Vec<f64> = row.iter().map(|&k| x[k]).collect();
            for (&k, v) in row.iter().zip(separate(&targets, d_min)) {
                x[k] = v;
            }
        }
        let candidate = normalized(&x);
        let s = stress(&candidate, &edges);
        if s < best.0 {
            best = (s, candidate);
        }
        let change = x
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change < 1e-15 {
            break;
        }
    }

    let (final_stress, xs) = best;
    let placed = nodes
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let rec = graph.record_at(i);
            let label = if rec.first_author_lastname.is_empty() {
                format!("#{}", rec.id)
            } else {
                rec.first_author_lastname.clone()
            };
            PlacedNode {
                id: rec.id,
                label,
                year: rec.year,
                layer: layer_of[k],
                x: xs[k],
            }
        })
        .collect();
    let mut out_edges: Vec<(PubId, PubId)> = edges
        .iter()
        .map(|&(s, t)| (graph.id_at(nodes[s]), graph.id_at(nodes[t])))
        .collect();
    out_edges.sort_unstable();

    Ok(LayoutResult {
        nodes: placed,
        edges: out_edges,
        layer_years,
        d_min,
        initial_stress,
        stress: final_stress,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::record::PublicationRecord;

    fn graph(years: &[(u32, i32)], edges: &[(u32, u32)]) -> CitationGraph {
        let recs: Vec<_> = years
            .iter()
            .map(|&(i, y)| PublicationRecord::new(i, y).with_authors([format!("Author{i}, A")]))
            .collect();
        let edges: Vec<_> = edges.iter().map(|&(a, b)| (PubId(a), PubId(b))).collect();
        build_graph(recs, &edges).unwrap().0
    }

    fn ids(v: &[u32]) -> Vec<PubId> {
        v.iter().map(|&i| PubId(i)).collect()
    }

    #[test]
    fn display_fewer_nodes_than_n() {
        let g = graph(&[(1, 2000), (2, 2001), (3, 2002)], &[]);
        assert_eq!(select_display(&g, 5).len(), 3);
    }

    #[test]
    fn display_by_score() {
        // scores: 1 <- {2,3} => 2, 2 <- {3} => 1, 3 => 0
        let g = graph(
            &[(1, 2000), (2, 2001), (3, 2002)],
            &[(2, 1), (3, 1), (3, 2)],
        );
        assert_eq!(select_display(&g, 2), ids(&[1, 2]));
    }

    #[test]
    fn display_tie_prefers_older() {
        // a=1 (1999), b=2 (2005); both cited once by c=3 (2006)
        let g = graph(&[(1, 2005), (2, 1999), (3, 2006)], &[(3, 1), (3, 2)]);
        assert_eq!(select_display(&g, 1), ids(&[2]));
    }

    #[test]
    fn single_node_centered() {
        let g = graph(&[(1, 2000)], &[]);
        let l = layout(&g, &ids(&[1]), &LayoutParams::default()).unwrap();
        assert_eq!(l.nodes[0].layer, 0);
        assert_eq!(l.nodes[0].x, 0.5);
        assert_eq!(l.nodes[0].label, "author1");
    }

    #[test]
    fn chain_aligns_vertically() {
        // c=3 (2000) <- b=2 (2002) <- a=1 (2004)
        let g = graph(&[(1, 2004), (2, 2002), (3, 2000)], &[(1, 2), (2, 3)]);
        let l = layout(&g, &ids(&[1, 2, 3]), &LayoutParams::default()).unwrap();
        let p = l.positions();
        assert_eq!(p[&PubId(3)].layer, 0);
        assert_eq!(p[&PubId(2)].layer, 1);
        assert_eq!(p[&PubId(1)].layer, 2);
        assert_eq!(p[&PubId(1)].x, p[&PubId(2)].x);
        assert_eq!(p[&PubId(2)].x, p[&PubId(3)].x);
        assert_eq!(l.stress, 0.0);
    }

    #[test]
    fn siblings_separate_around_parent() {
        let g = graph(&[(1, 2000), (2, 2005), (3, 2005)], &[(2, 1), (3, 1)]);
        for seed in 0..10 {
            let params = LayoutParams {
                d_min: Some(0.2),
                seed,
                ..LayoutParams::default()
            };
            let l = layout(&g, &ids(&[1, 2, 3]), &params).unwrap();
            let p = l.positions();
            assert_eq!(p[&PubId(2)].layer, p[&PubId(3)].layer);
            let (a, b, parent) = (p[&PubId(2)].x, p[&PubId(3)].x, p[&PubId(1)].x);
            assert!((a - b).abs() >= 0.2 - 1e-9);
            assert!(a.min(b) <= parent && parent <= a.max(b));
            // Normalized optimum: siblings at 0 and 1, parent at 0.5.
            assert!(l.stress <= l.initial_stress);
            assert!((l.stress - 0.5).abs() < 1e-9, "stress {}", l.stress);
        }
    }

    #[test]
    fn overfull_layer_is_error() {
        let g = graph(&[(1, 2000), (2, 2000), (3, 2000)], &[]);
        let params = LayoutParams {
            d_min: Some(0.6),
            ..LayoutParams::default()
        };
        match layout(&g, &ids(&[1, 2, 3]), &params) {
            Err(Error::LayerOverflow { year, count, .. }) => assert_eq!((year, count), (2000, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn default_separation_from_occupancy() {
        let g = graph(&[(1, 2000), (2, 2000), (3, 2000), (4, 2001)], &[(4, 1)]);
        let l = layout(&g, &ids(&[1, 2, 3, 4]), &LayoutParams::default()).unwrap();
        assert!((l.d_min - 1.0 / 3.0).abs() < 1e-15);
        let xs: Vec<f64> = l
            .nodes
            .iter()
            .filter(|n| n.year == 2000)
            .map(|n| n.x)
            .collect();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                assert!((xs[i] - xs[j]).abs() >= l.d_min - 1e-9);
            }
        }
    }

    #[test]
    fn separate_projection() {
        let x = separate(&[0.5, 0.5], 0.2);
        assert!((x[0] - 0.4).abs() < 1e-12 && (x[1] - 0.6).abs() < 1e-12);
        let x = separate(&[0.0, 0.0, 0.0], 0.5);
        assert_eq!(x, vec![0.0, 0.5, 1.0]);
        let x = separate(&[0.1, 0.9], 0.2);
        assert!((x[0] - 0.1).abs() < 1e-12 && (x[1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn unknown_display_id() {
        let g = graph(&[(1, 2000)], &[]);
        assert!(layout(&g, &ids(&[2]), &LayoutParams::default()).is_err());
    }
}
