//! Export of the displayed publications with their scores, cluster and
//! layout position.
//!
//! Columns, in order: authors, title, source, year, internal_citation_score,
//! external_citation_score, cluster, x, layer. Reals are written with six
//! decimals (round half to even); missing values are empty cells (`null` in
//! JSON lines).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::clustering::{ClusterLabel, Clustering};
use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::layout::LayoutResult;
use crate::record::PubId;

pub const COLUMNS: [&str; 9] = [
    "authors",
    "title",
    "source",
    "year",
    "internal_citation_score",
    "external_citation_score",
    "cluster",
    "x",
    "layer",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Tsv,
    Csv,
    JsonLines,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(ExportFormat::Tsv),
            "csv" => Ok(ExportFormat::Csv),
            "jsonlines" | "jsonl" => Ok(ExportFormat::JsonLines),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Tsv => "tsv",
            ExportFormat::Csv => "csv",
            ExportFormat::JsonLines => "jsonlines",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRow {
    pub authors: Vec<String>,
    pub title: String,
    pub source: String,
    pub year: i32,
    pub internal_citation_score: usize,
    pub external_citation_score: u64,
    pub cluster: Option<ClusterLabel>,
    pub x: Option<f64>,
    pub layer: Option<usize>,
}

/// The publications on display, plus whatever analysis has been run on them.
#[derive(Debug, Clone)]
pub struct ExportView<'a> {
    pub graph: &'a CitationGraph,
    pub display: Vec<PubId>,
    pub clustering: Option<&'a Clustering>,
    pub layout: Option<&'a LayoutResult>,
}

impl<'a> ExportView<'a> {
    /// View over the nodes placed by `layout`.
    pub fn from_layout(
        graph: &'a CitationGraph,
        layout: &'a LayoutResult,
        clustering: Option<&'a Clustering>,
    ) -> Self {
        ExportView {
            graph,
            display: layout.nodes.iter().map(|n| n.id).collect(),
            clustering,
            layout: Some(layout),
        }
    }
}

/// Six decimals, ties to even. Values that round to zero print without a sign.
pub fn format_real(v: f64) -> String {
    let s = format!("{v:.6}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// Rows in display order (internal score descending, then older, then smaller id),
/// with warnings for analyses that have not been run.
pub fn export_rows(view: &ExportView<'_>) -> Result<(Vec<ExportRow>, Vec<String>)> {
    let mut warnings = Vec::new();
    if view.clustering.is_none() {
        warnings.push("no clustering computed; cluster column left empty".to_string());
    }
    if view.layout.is_none() {
        warnings.push("no layout computed; x and layer columns left empty".to_string());
    }
    let positions = view.layout.map(|l| l.positions());
    let mut keyed = Vec::with_capacity(view.display.len());
    for &id in &view.display {
        let rec = view.graph.record(id)?;
        let score = view.graph.internal_citation_score(id)?;
        keyed.push(((std::cmp::Reverse(score), rec.year, id), rec, score));
    }
    keyed.sort_by_key(|k| k.0);
    keyed.dedup_by_key(|k| k.0);

    let mut missing_positions = 0;
    let rows = keyed
        .into_iter()
        .map(|((_, _, id), rec, score)| {
            let placed = positions.as_ref().and_then(|p| p.get(&id));
            if positions.is_some() && placed.is_none() {
                missing_positions += 1;
            }
            ExportRow {
                authors: rec.authors.clone(),
                title: rec.title.clone(),
                source: rec.source.clone(),
                year: rec.year,
                internal_citation_score: score,
                external_citation_score: rec.external_citation_count,
                cluster: view.clustering.and_then(|c| c.label(id)),
                x: placed.map(|p| p.x),
                layer: placed.map(|p| p.layer),
            }
        })
        .collect();
    if missing_positions > 0 {
        warnings.push(format!(
            "{missing_positions} displayed publications have no layout position"
        ));
    }
    Ok((rows, warnings))
}

fn cells(row: &ExportRow) -> [String; 9] {
    [
        row.authors.join("; "),
        row.title.clone(),
        row.source.clone(),
        row.year.to_string(),
        row.internal_citation_score.to_string(),
        row.external_citation_score.to_string(),
        row.cluster.map(|c| c.to_string()).unwrap_or_default(),
        row.x.map(format_real).unwrap_or_default(),
        row.layer.map(|l| l.to_string()).unwrap_or_default(),
    ]
}

fn tsv_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn json_row(row: &ExportRow) -> String {
    let cluster = match row.cluster {
        Some(ClusterLabel::Cluster(c)) => json!(c),
        Some(ClusterLabel::Unassigned) => json!("unassigned"),
        None => Value::Null,
    };
    let x = row.x.map_or_else(|| "null".to_string(), format_real);
    let layer = row
        .layer
        .map_or_else(|| "null".to_string(), |l| l.to_string());
    // Assembled by hand so reals keep their fixed six decimals.
    format!(
        "{{\"authors\":{},\"title\":{},\"source\":{},\"year\":{},\"internal_citation_score\":{},\"external_citation_score\":{},\"cluster\":{},\"x\":{},\"layer\":{}}}",
        json!(row.authors),
        json!(row.title),
        json!(row.source),
        row.year,
        row.internal_citation_score,
        row.external_citation_score,
        cluster,
        x,
        layer
    )
}

pub fn write_rows(rows: &[ExportRow], format: ExportFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        ExportFormat::Tsv => {
            out.extend_from_slice(COLUMNS.join("\t").as_bytes());
            out.push(b'\n');
            for row in rows {
                let line: Vec<String> = cells(row).iter().map(|c| tsv_escape(c)).collect();
                out.extend_from_slice(line.join("\t").as_bytes());
                out.push(b'\n');
            }
        }
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(COLUMNS)
                .map_err(|e| Error::Export(e.to_string()))?;
            for row in rows {
                w.write_record(cells(row))
                    .map_err(|e| Error::Export(e.to_string()))?;
            }
            w.flush()?;
        }
        ExportFormat::JsonLines => {
            for row in rows {
                out.extend_from_slice(json_row(row).as_bytes());
                out.push(b'\n');
            }
        }
    }
    Ok(out)
}

/// Serializes the view; returns the bytes and any warnings.
pub fn export_records(
    view: &ExportView<'_>,
    format: ExportFormat,
) -> Result<(Vec<u8>, Vec<String>)> {
    let (rows, warnings) = export_rows(view)?;
    Ok((write_rows(&rows, format)?, warnings))
}

/// Reads rows back from a JSON-lines export.
pub fn read_jsonlines(bytes: &[u8]) -> Result<Vec<ExportRow>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Encoding(e.valid_up_to()))?;
    let bad = |line: usize, msg: &str| Error::format("jsonlines", line, msg);
    let mut rows = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let v: Value = serde_json::from_str(line).map_err(|e| bad(i + 1, &e.to_string()))?;
        let str_field = |k: &str| -> Result<String> {
            v[k].as_str()
                .map(str::to_string)
                .ok_or_else(|| bad(i + 1, k))
        };
        let cluster = match &v["cluster"] {
            Value::Null => None,
            Value::String(s) if s == "unassigned" => Some(ClusterLabel::Unassigned),
            Value::Number(n) => Some(ClusterLabel::Cluster(
                n.as_u64().ok_or_else(|| bad(i + 1, "cluster"))? as u32,
            )),
            _ => return Err(bad(i + 1, "cluster")),
        };
        rows.push(ExportRow {
            authors: v["authors"]
                .as_array()
                .ok_or_else(|| bad(i + 1, "authors"))?
                .iter()
                .map(|a| {
                    a.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| bad(i + 1, "authors"))
                })
                .collect::<Result<_>>()?,
            title: str_field("title")?,
            source: str_field("source")?,
            year: v["year"].as_i64().ok_or_else(|| bad(i + 1, "year"))? as i32,
            internal_citation_score: v["internal_citation_score"]
                .as_u64()
                .ok_or_else(|| bad(i + 1, "internal_citation_score"))?
                as usize,
            external_citation_score: v["external_citation_score"]
                .as_u64()
                .ok_or_else(|| bad(i + 1, "external_citation_score"))?,
            cluster,
            x: v["x"].as_f64(),
            layer: v["layer"].as_u64().map(|l| l as usize),
        });
    }
    Ok(rows)
}
