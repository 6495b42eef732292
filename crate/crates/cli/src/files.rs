//! Clustering and layout files: JSON documents tagged with a format line so
//! one cannot be passed where the other is expected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use citnet_core::native;
use citnet_core::{BuildReport, CitationGraph, Clustering, LayoutResult, PubId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const CLUSTERING_FORMAT: &str = "citnet-clustering 1";
pub const LAYOUT_FORMAT: &str = "citnet-layout 1";
pub const DRILL_FORMAT: &str = "citnet-drill 1";

// Plain structs rather than a flattened wrapper: flattening buffers the
// document and loses serde_json's numeric map keys.
#[derive(Serialize, Deserialize)]
struct ClusteringDoc {
    format: String,
    clustering: Clustering,
}

#[derive(Serialize, Deserialize)]
struct LayoutDoc {
    format: String,
    layout: LayoutResult,
}

fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path, format: &str, field: &str) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let found = value.get("format").and_then(|f| f.as_str()).unwrap_or("");
    if found != format {
        bail!(
            "{} is a {found:?} file, expected {format:?}",
            path.display()
        );
    }
    if value.get(field).is_none() {
        bail!("{} has no {field} section", path.display());
    }
    serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid {format} file", path.display()))
}

pub fn save_clustering(path: &Path, clustering: &Clustering) -> Result<()> {
    let doc = ClusteringDoc {
        format: CLUSTERING_FORMAT.to_string(),
        clustering: clustering.clone(),
    };
    write_json(path, &doc)
}

pub fn load_clustering(path: &Path) -> Result<Clustering> {
    read_json::<ClusteringDoc>(path, CLUSTERING_FORMAT, "clustering").map(|d| d.clustering)
}

pub fn save_layout(path: &Path, layout: &LayoutResult) -> Result<()> {
    let doc = LayoutDoc {
        format: LAYOUT_FORMAT.to_string(),
        layout: layout.clone(),
    };
    write_json(path, &doc)
}

pub fn load_layout(path: &Path) -> Result<LayoutResult> {
    read_json::<LayoutDoc>(path, LAYOUT_FORMAT, "layout").map(|d| d.layout)
}

/// One level of a command-line drill stack: a graph file and the ids marked
/// when it was drilled into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackLevel {
    pub graph: PathBuf,
    pub marked: Vec<PubId>,
    pub description: String,
}

#[derive(Serialize, Deserialize)]
struct DrillDoc {
    format: String,
    levels: Vec<StackLevel>,
}

pub fn save_stack(path: &Path, levels: &[StackLevel]) -> Result<()> {
    let doc = DrillDoc {
        format: DRILL_FORMAT.to_string(),
        levels: levels.to_vec(),
    };
    write_json(path, &doc)
}

pub fn load_stack(path: &Path) -> Result<Vec<StackLevel>> {
    let levels = read_json::<DrillDoc>(path, DRILL_FORMAT, "levels")?.levels;
    if levels.is_empty() {
        bail!("{} has an empty drill stack", path.display());
    }
    Ok(levels)
}

pub fn load_graph(path: &Path) -> Result<(CitationGraph, BuildReport)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    native::read_native(&text).with_context(|| format!("cannot load graph {}", path.display()))
}

pub fn save_graph(path: &Path, graph: &CitationGraph, report: &BuildReport) -> Result<()> {
    std::fs::write(path, native::write_native(graph, report))
        .with_context(|| format!("cannot write {}", path.display()))
}
