//! Intermediate publications and the drill-down stack.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::record::PubId;

/// Unmarked publications on a directed citation path between two marked ones.
pub fn intermediates(graph: &CitationGraph, marked: &BTreeSet<PubId>) -> Result<BTreeSet<PubId>> {
    let mut seeds = Vec::with_capacity(marked.len());
    for &id in marked {
        seeds.push(graph.index_of(id).ok_or(Error::UnknownId(id))?);
    }
    let below = graph.reach_mask(&seeds, true);
    let above = graph.reach_mask(&seeds, false);
    Ok((0..graph.node_count())
        .filter(|&i| below[i] && above[i])
        .map(|i| graph.id_at(i))
        .filter(|id| !marked.contains(id))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrillLevel {
    pub graph: Arc<CitationGraph>,
    pub marked: BTreeSet<PubId>,
    pub description: String,
}

/// Stack of networks; the bottom is the full network and is never popped.
#[derive(Debug, Clone, PartialEq)]
pub struct DrillSession {
    levels: Vec<DrillLevel>,
}

impl DrillSession {
    pub fn new(graph: Arc<CitationGraph>) -> Self {
        DrillSession {
            levels: vec![DrillLevel {
                graph,
                marked: BTreeSet::new(),
                description: "full network".into(),
            }],
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn current(&self) -> &DrillLevel {
        self.levels.last().expect("stack is never empty")
    }

    pub fn levels(&self) -> &[DrillLevel] {
        &self.levels
    }

    pub fn graph(&self) -> &Arc<CitationGraph> {
        &self.current().graph
    }

    /// Replaces the marked set of the current view.
    pub fn set_marked(&mut self, marked: BTreeSet<PubId>) -> Result<()> {
        let graph = &self.current().graph;
        if let Some(&missing) = marked.iter().find(|id| !graph.contains(**id)) {
            return Err(Error::UnknownId(missing));
        }
        self.levels.last_mut().unwrap().marked = marked;
        Ok(())
    }

    /// Pushes the sub-network induced by `marked` (plus intermediates when
    /// asked). The new level keeps `marked` as its marked set.
    pub fn drill_down(
        &mut self,
        marked: BTreeSet<PubId>,
        include_intermediates: bool,
    ) -> Result<&DrillLevel> {
        if marked.is_empty() {
            return Err(Error::EmptyMarkedSet);
        }
        let parent = self.current().graph.clone();
        let mut keep = marked.clone();
        if include_intermediates {
            keep.extend(intermediates(&parent, &marked)?);
        } else if let Some(&missing) = marked.iter().find(|id| !parent.contains(**id)) {
            return Err(Error::UnknownId(missing));
        }
        let sub = parent.induced_subgraph(&keep)?;
        let description = format!(
            "{} marked{} -> {} publications, {} citation relations",
            marked.len(),
            if include_intermediates {
                " + intermediates"
            } else {
                ""
            },
            sub.node_count(),
            sub.edge_count()
        );
        self.levels.push(DrillLevel {
            graph: Arc::new(sub),
            marked,
            description,
        });
        Ok(self.current())
    }

    /// Drills down into the current view's marked set.
    pub fn drill_marked(&mut self, include_intermediates: bool) -> Result<&DrillLevel> {
        let marked = self.current().marked.clone();
        self.drill_down(marked, include_intermediates)
    }

    pub fn drill_up(&mut self) -> Result<&DrillLevel> {
        if self.levels.len() < 2 {
            return Err(Error::AtBottom);
        }
        self.levels.pop();
        Ok(self.current())
    }
}
