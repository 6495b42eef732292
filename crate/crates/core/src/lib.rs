//! Citation network exploration: Web of Science ingest, citation graphs,
//! core publications, resolution-controlled clustering, drill-down into
//! marked sub-networks and timeline (historiograph) layout.

pub mod clustering;
pub mod drill;
pub mod error;
pub mod export;
pub mod graph;
pub mod kcore;
pub mod layout;
pub mod matching;
pub mod native;
pub mod query;
pub mod record;
pub mod svg;
pub mod synthetic;
pub mod wos;

pub use clustering::{
    brute_force_cluster, cluster, compute_quality, ClusterLabel, ClusterOptions, Clustering,
};
pub use drill::{intermediates, DrillLevel, DrillSession};
pub use error::{Error, Result};
pub use export::{export_records, ExportFormat, ExportRow, ExportView};
pub use graph::{
    build_graph, parse_blocks, BlockRow, BlockStats, BuildReport, CitationGraph, DropReason,
    DroppedEdge,
};
pub use kcore::{extract_core, CoreSet};
pub use layout::{layout, select_display, LayoutParams, LayoutResult, PlacedNode};
pub use matching::{match_references, MatchReport};
pub use query::{mark, parse_query, Field, Query, QueryOptions};
pub use record::{parse_cited_reference, CitedRef, PubId, PublicationRecord};
pub use wos::{parse_wos_file, read_wos, Diagnostic, IngestOptions, ParsedFile, Severity};

/// Default minimum number of citation relations for core publications.
pub const DEFAULT_CORE_K: usize = 10;
/// Default clustering resolution.
pub const DEFAULT_RESOLUTION: f64 = 0.75;
/// Default minimum cluster size; smaller clusters are dissolved.
pub const DEFAULT_MIN_CLUSTER_SIZE: usize = 10;
/// Default number of clustering restarts.
pub const DEFAULT_RESTARTS: usize = 10;
/// Default number of publications shown in a layout.
pub const DEFAULT_DISPLAY: usize = 40;
