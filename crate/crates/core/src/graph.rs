//! Immutable acyclic citation graph.
//!
//! Edges run from the citing publication to the cited one. Nodes are kept
//! in ascending id order; adjacency is stored in compressed rows in both
//! directions.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{PubId, PublicationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    SelfLoop,
    Duplicate,
    YearOrder,
    Cycle,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::SelfLoop => "self-loop",
            DropReason::Duplicate => "duplicate edge",
            DropReason::YearOrder => "year order violation",
            DropReason::Cycle => "same-year cycle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            DropReason::SelfLoop,
            DropReason::Duplicate,
            DropReason::YearOrder,
            DropReason::Cycle,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DroppedEdge {
    pub citing: PubId,
    pub cited: PubId,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub dropped: Vec<DroppedEdge>,
}

impl BuildReport {
    pub fn count(&self, reason: DropReason) -> usize {
        self.dropped.iter().filter(|d| d.reason == reason).count()
    }
}

#[derive(Debug, Clone)]
pub struct CitationGraph {
    records: Vec<Arc<PublicationRecord>>,
    index: HashMap<PubId, u32>,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
}

impl PartialEq for CitationGraph {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
            && self.out_offsets == other.out_offsets
            && self.out_targets == other.out_targets
    }
}

fn csr(n: usize, pairs: &[(u32, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; n + 1];
    for &(s, _) in pairs {
        offsets[s as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; pairs.len()];
    for &(s, t) in pairs {
        targets[fill[s as usize]] = t;
        fill[s as usize] += 1;
    }
    (offsets, targets)
}

/// Builds a graph, dropping edges that would break the graph invariants.
///
/// Edges are deduplicated, self-loops dropped, edges whose citing year
/// precedes the cited year dropped, and same-year cycles broken by
/// repeatedly removing the lexicographically smallest `(citing, cited)`
/// edge that lies on a cycle. Every removal is listed in the report.
pub fn build_graph<R>(records: R, edges: &[(PubId, PubId)]) -> Result<(CitationGraph, BuildReport)>
where
    R: IntoIterator,
    R::Item: Into<Arc<PublicationRecord>>,
{
    let mut records: Vec<Arc<PublicationRecord>> = records.into_iter().map(Into::into).collect();
    records.sort_by_key(|r| r.id);
    if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::DuplicateId(w[0].id));
    }
    let index: HashMap<PubId, u32> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id, i as u32))
        .collect();

    let mut report = BuildReport::default();
    let mut pairs = Vec::with_capacity(edges.len());
    for &(citing, cited) in edges {
        let s = *index.get(&citing).ok_or(Error::DanglingEdge {
            citing,
            cited,
            missing: citing,
        })?;
        let t = *index.get(&cited).ok_or(Error::DanglingEdge {
            citing,
            cited,
            missing: cited,
        })?;
        pairs.push((s, t));
    }
    pairs.sort_unstable();

    let mut kept: Vec<(u32, u32)> = Vec::with_capacity(pairs.len());
    let mut same_year = Vec::new();
    for (i, &(s, t)) in pairs.iter().enumerate() {
        let (citing, cited) = (records[s as usize].id, records[t as usize].id);
        let reason = if i > 0 && pairs[i - 1] == (s, t) {
            Some(DropReason::Duplicate)
        } else if s == t {
            Some(DropReason::SelfLoop)
        } else if records[s as usize].year < records[t as usize].year {
            Some(DropReason::YearOrder)
        } else {
            None
        };
        match reason {
            Some(reason) => report.dropped.push(DroppedEdge {
                citing,
                cited,
                reason,
            }),
            None => {
                if records[s as usize].year == records[t as usize].year {
                    same_year.push(kept.len());
                }
                kept.push((s, t));
            }
        }
    }

    // Only same-year edges can close a cycle.
    let cyclic = break_cycles(&kept, &same_year);
    if !cyclic.is_empty() {
        let remove: BTreeSet<usize> = cyclic.iter().copied().collect();
        for &k in &cyclic {
            let (s, t) = kept[k];
            report.dropped.push(DroppedEdge {
                citing: records[s as usize].id,
                cited: records[t as usize].id,
                reason: DropReason::Cycle,
            });
        }
        kept = kept
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !remove.contains(i))
            .map(|(_, e)| e)
            .collect();
    }

    let n = records.len();
    let (out_offsets, out_targets) = csr(n, &kept);
    let mut reversed: Vec<(u32, u32)> = kept.iter().map(|&(s, t)| (t, s)).collect();
    reversed.sort_unstable();
    let (in_offsets, in_sources) = csr(n, &reversed);

    Ok((
        CitationGraph {
            records,
            index,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        },
        report,
    ))
}

/// Returns positions (into `edges`) of the edges removed to make the
/// same-year subgraph acyclic, sorted by edge.
fn break_cycles(edges: &[(u32, u32)], same_year: &[usize]) -> Vec<usize> {
    let mut removed = Vec::new();
    let mut work: Vec<Vec<usize>> = vec![same_year.to_vec()];
    while let Some(group) = work.pop() {
        let mut g: DiGraph<u32, usize> = DiGraph::new();
        let mut nodes: HashMap<u32, petgraph::graph::NodeIndex> = HashMap::new();
        for &e in &group {
            let (s, t) = edges[e];
            let a = *nodes.entry(s).or_insert_with(|| g.add_node(s));
            let b = *nodes.entry(t).or_insert_with(|| g.add_node(t));
            g.add_edge(a, b, e);
        }
        let mut comp = vec![usize::MAX; g.node_count()];
        let mut cyclic_components = 0;
        for scc in tarjan_scc(&g) {
            if scc.len() > 1 {
                for v in scc {
                    comp[v.index()] = cyclic_components;
                }
                cyclic_components += 1;
            }
        }
        let mut per_comp: Vec<Vec<usize>> = vec![Vec::new(); cyclic_components];
        for er in g.raw_edges() {
            let (a, b) = (er.source().index(), er.target().index());
            if comp[a] != usize::MAX && comp[a] == comp[b] {
                per_comp[comp[a]].push(er.weight);
            }
        }
        for mut cedges in per_comp {
            // Positions follow (citing, cited) order since `edges` is sorted.
            cedges.sort_unstable();
            removed.push(cedges[0]);
            work.push(cedges[1..].to_vec());
        }
    }
    removed.sort_unstable_by_key(|&e| edges[e]);
    removed
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRow {
    pub label: String,
    pub start_year: i32,
    pub end_year: i32,
    pub publication_count: usize,
    pub link_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    pub blocks: Vec<BlockRow>,
}

/// Parses `"1998-2002,2003-2007"` into year ranges; a lone year is a
/// one-year block. Ordering and overlap are checked by `block_stats`.
pub fn parse_blocks(spec: &str) -> Result<Vec<(i32, i32)>> {
    spec.split(',')
        .map(str::trim)
        .filter(|b| !b.is_empty())
        .map(|b| {
            let bad = |reason: &str| Error::BlockSpec(format!("{reason} in {b:?}"));
            let (s, e) = match b.split_once('-') {
                Some((s, e)) => (s.trim(), e.trim()),
                None => (b, b),
            };
            let s = s.parse().map_err(|_| bad("invalid start year"))?;
            let e = e.parse().map_err(|_| bad("invalid end year"))?;
            Ok((s, e))
        })
        .collect()
}

impl CitationGraph {
    pub fn node_count(&self) -> usize {
        self.records.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Earliest and latest publication year.
    pub fn year_range(&self) -> Option<(i32, i32)> {
        let years = self.records.iter().map(|r| r.year);
        Some((years.clone().min()?, years.max()?))
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, id: PubId) -> bool {
        self.index.contains_key(&id)
    }

    /// Dense position of `id` (ids ascending).
    pub fn index_of(&self, id: PubId) -> Option<usize> {
        self.index.get(&id).map(|&i| i as usize)
    }

    pub fn id_at(&self, idx: usize) -> PubId {
        self.records[idx].id
    }

    pub fn year_at(&self, idx: usize) -> i32 {
        self.records[idx].year
    }

    pub fn record_at(&self, idx: usize) -> &PublicationRecord {
        &self.records[idx]
    }

    pub fn record(&self, id: PubId) -> Result<&PublicationRecord> {
        self.index_of(id)
            .map(|i| &*self.records[i])
            .ok_or(Error::UnknownId(id))
    }

    pub fn records(&self) -> impl ExactSizeIterator<Item = &PublicationRecord> + '_ {
        self.records.iter().map(|r| &**r)
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = PubId> + '_ {
        self.records.iter().map(|r| r.id)
    }

    /// Indices cited by the node at `idx`.
    pub fn out_neighbors(&self, idx: usize) -> &[u32] {
        &self.out_targets[self.out_offsets[idx]..self.out_offsets[idx + 1]]
    }

    /// Indices citing the node at `idx`.
    pub fn in_neighbors(&self, idx: usize) -> &[u32] {
        &self.in_sources[self.in_offsets[idx]..self.in_offsets[idx + 1]]
    }

    /// Number of citation relations (in plus out).
    pub fn undirected_degree(&self, idx: usize) -> usize {
        self.out_neighbors(idx).len() + self.in_neighbors(idx).len()
    }

    /// All edges as `(citing, cited)`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (PubId, PubId)> + '_ {
        (0..self.node_count()).flat_map(move |s| {
            self.out_neighbors(s)
                .iter()
                .map(move |&t| (self.records[s].id, self.records[t as usize].id))
        })
    }

    pub fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |s| self.out_neighbors(s).iter().map(move |&t| (s, t as usize)))
    }

    fn idx(&self, id: PubId) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownId(id))
    }

    pub fn internal_citation_score(&self, id: PubId) -> Result<usize> {
        Ok(self.in_neighbors(self.idx(id)?).len())
    }

    pub fn external_citation_score(&self, id: PubId) -> Result<u64> {
        Ok(self.records[self.idx(id)?].external_citation_count)
    }

    fn reach(
        &self,
        seeds: &BTreeSet<PubId>,
        max_depth: Option<usize>,
        forward: bool,
    ) -> Result<BTreeSet<PubId>> {
        if max_depth == Some(0) {
            return Err(Error::ZeroDepth);
        }
        let n = self.node_count();
        let mut depth = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &s in seeds {
            let i = self.idx(s)?;
            depth[i] = 0;
            queue.push_back(i);
        }
        let limit = max_depth.unwrap_or(usize::MAX);
        let mut out = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            if depth[u] >= limit {
                continue;
            }
            let next = if forward {
                self.out_neighbors(u)
            } else {
                self.in_neighbors(u)
            };
            for &v in next {
                let v = v as usize;
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    out.insert(self.records[v].id);
                    queue.push_back(v);
                }
            }
        }
        Ok(out)
    }

    /// Publications cited, directly or transitively, by the seeds.
    pub fn predecessors(
        &self,
        seeds: &BTreeSet<PubId>,
        max_depth: Option<usize>,
    ) -> Result<BTreeSet<PubId>> {
        self.reach(seeds, max_depth, true)
    }

    /// Publications citing, directly or transitively, the seeds.
    pub fn successors(
        &self,
        seeds: &BTreeSet<PubId>,
        max_depth: Option<usize>,
    ) -> Result<BTreeSet<PubId>> {
        self.reach(seeds, max_depth, false)
    }

    /// Boolean reachability masks over node indices (seeds excluded unless
    /// reached through a path of length >= 1).
    pub(crate) fn reach_mask(&self, seeds: &[usize], forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            let next = if forward {
                self.out_neighbors(s)
            } else {
                self.in_neighbors(s)
            };
            for &v in next {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v as usize);
                }
            }
        }
        while let Some(u) = stack.pop() {
            let next = if forward {
                self.out_neighbors(u)
            } else {
                self.in_neighbors(u)
            };
            for &v in next {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v as usize);
                }
            }
        }
        seen
    }

    /// Weakly connected components, each sorted, numbered by smallest id.
    pub fn connected_components(&self) -> Vec<Vec<PubId>> {
        let n = self.node_count();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for (s, t) in self.edge_indices() {
            let a = find(&mut parent, s as u32);
            let b = find(&mut parent, t as u32);
            if a != b {
                // Root at the smaller index so roots are component minima.
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi as usize] = lo;
            }
        }
        let mut slot: HashMap<u32, usize> = HashMap::new();
        let mut comps: Vec<Vec<PubId>> = Vec::new();
        for i in 0..n {
            let root = find(&mut parent, i as u32);
            let k = *slot.entry(root).or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[k].push(self.records[i].id);
        }
        comps
    }

    /// Publication and intra-block link counts per year block.
    pub fn block_stats(&self, blocks: &[(i32, i32)]) -> Result<BlockStats> {
        for &(s, e) in blocks {
            if s > e {
                return Err(Error::InvalidBlocks {
                    start: s,
                    end: e,
                    reason: "start after end".into(),
                });
            }
        }
        for w in blocks.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::InvalidBlocks {
                    start: w[1].0,
                    end: w[1].1,
                    reason: format!("overlaps or precedes {}-{}", w[0].0, w[0].1),
                });
            }
        }
        let block_of = |year: i32| blocks.iter().position(|&(s, e)| (s..=e).contains(&year));
        let mut rows: Vec<BlockRow> = blocks
            .iter()
            .map(|&(s, e)| BlockRow {
                label: format!("{s}-{e}"),
                start_year: s,
                end_year: e,
                publication_count: 0,
                link_count: 0,
            })
            .collect();
        let node_block: Vec<Option<usize>> =
            self.records.iter().map(|r| block_of(r.year)).collect();
        for b in node_block.iter().flatten() {
            rows[*b].publication_count += 1;
        }
        for (s, t) in self.edge_indices() {
            if let (Some(a), Some(b)) = (node_block[s], node_block[t]) {
                if a == b {
                    rows[a].link_count += 1;
                }
            }
        }
        Ok(BlockStats { blocks: rows })
    }

    /// A topological order (citing before cited), or `None` if cyclic.
    pub fn topological_order(&self) -> Option<Vec<PubId>> {
        let n = self.node_count();
        let mut indeg: Vec<usize> = (0..n).map(|i| self.in_neighbors(i).len()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(self.records[u].id);
            for &v in self.out_neighbors(u) {
                indeg[v as usize] -= 1;
                if indeg[v as usize] == 0 {
                    queue.push_back(v as usize);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Induced subgraph on `keep` (all parent edges between kept nodes).
    pub fn induced_subgraph(&self, keep: &BTreeSet<PubId>) -> Result<CitationGraph> {
        let mut sel = Vec::with_capacity(keep.len());
        for &id in keep {
            sel.push(self.idx(id)?);
        }
        let mut new_index = vec![u32::MAX; self.node_count()];
        for (k, &i) in sel.iter().enumerate() {
            new_index[i] = k as u32;
        }
        let mut pairs = Vec::new();
        for &i in &sel {
            for &t in self.out_neighbors(i) {
                let nt = new_index[t as usize];
                if nt != u32::MAX {
                    pairs.push((new_index[i], nt));
                }
            }
        }
        let n = sel.len();
        let (out_offsets, out_targets) = csr(n, &pairs);
        let mut reversed: Vec<(u32, u32)> = pairs.iter().map(|&(s, t)| (t, s)).collect();
        reversed.sort_unstable();
        let (in_offsets, in_sources) = csr(n, &reversed);
        let records: Vec<Arc<PublicationRecord>> =
            sel.iter().map(|&i| Arc::clone(&self.records[i])).collect();
        let index = records
            .iter()
            .enumerate()
            .map(|(k, r)| (r.id, k as u32))
            .collect();
        Ok(CitationGraph {
            records,
            index,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        })
    }
}
