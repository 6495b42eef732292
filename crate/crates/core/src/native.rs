//! Native graph file (`.cng`): the text format passed between pipeline stages.
//!
//! ```text
//! citnet-graph 1
//! records <N>
//! <N record lines, 15 tab-separated fields>
//! edges <E>
//! <citing>\t<cited>
//! dropped <D>
//! <citing>\t<cited>\t<reason>
//! end
//! ```
//!
//! Record fields: id, year, external citation count, authors,
//! first-author last name, title, source, source key, volume, begin page,
//! DOI, abstract, author keywords, cited references, extra fields.
//! Text is escaped with `\\`, `\t`, `\n`, `\r` and `\|`; list elements are
//! joined by `|` and an empty element is `\e`; an absent optional value is
//! `\-`; extra fields are `TAG=value` list elements. Writing a loaded file
//! reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{build_graph, BuildReport, CitationGraph, DropReason, DroppedEdge};
use crate::record::{PubId, PublicationRecord};

pub const MAGIC: &str = "citnet-graph 1";
const ABSENT: &str = "\\-";
const EMPTY_ITEM: &str = "\\e";
const KIND: &str = "graph";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '|' => out.push_str("\\|"),
            c => out.push(c),
        }
    }
    out
}

fn opt(v: &Option<String>) -> String {
    v.as_deref().map_or_else(|| ABSENT.to_string(), escape)
}

fn list<S: AsRef<str>>(items: &[S]) -> String {
    items
        .iter()
        .map(|s| match s.as_ref() {
            "" => EMPTY_ITEM.to_string(),
            s => escape(s),
        })
        .collect::<Vec<_>>()
        .join("|")
}

/// Splits on unescaped `|` and unescapes each part.
fn unescape_list(field: &str, line: usize) -> Result<Vec<String>> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('\\') => cur.push('\\'),
                Some('t') => cur.push('\t'),
                Some('n') => cur.push('\n'),
                Some('r') => cur.push('\r'),
                Some('|') => cur.push('|'),
                Some('e') => {}
                other => {
                    return Err(Error::format(
                        KIND,
                        line,
                        format!("bad escape \\{}", other.map_or(String::new(), String::from)),
                    ))
                }
            },
            '|' => parts.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    parts.push(cur);
    Ok(parts)
}

fn unescape(field: &str, line: usize) -> Result<String> {
    let mut parts = unescape_list(field, line)?;
    if parts.len() != 1 {
        return Err(Error::format(KIND, line, "unescaped '|' in scalar field"));
    }
    Ok(parts.pop().unwrap())
}

fn unescape_opt(field: &str, line: usize) -> Result<Option<String>> {
    if field == ABSENT {
        Ok(None)
    } else {
        unescape(field, line).map(Some)
    }
}

fn unescape_vec(field: &str, line: usize) -> Result<Vec<String>> {
    if field.is_empty() {
        Ok(Vec::new())
    } else {
        unescape_list(field, line)
    }
}

fn record_line(r: &PublicationRecord) -> String {
    let extra: Vec<String> = r
        .extra_fields
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    [
        r.id.to_string(),
        r.year.to_string(),
        r.external_citation_count.to_string(),
        list(&r.authors),
        escape(&r.first_author_lastname),
        escape(&r.title),
        escape(&r.source),
        escape(&r.source_key),
        opt(&r.volume),
        opt(&r.begin_page),
        opt(&r.doi),
        opt(&r.abstract_text),
        r.author_keywords
            .as_ref()
            .map_or_else(|| ABSENT.to_string(), |k| list(k)),
        list(&r.cited_references),
        list(&extra),
    ]
    .join("\t")
}

fn parse_record(text: &str, line: usize) -> Result<PublicationRecord> {
    let f: Vec<&str> = text.split('\t').collect();
    if f.len() != 15 {
        return Err(Error::format(
            KIND,
            line,
            format!("expected 15 fields, found {}", f.len()),
        ));
    }
    let num = |s: &str, what: &str| Error::format(KIND, line, format!("invalid {what} {s:?}"));
    let extra = unescape_vec(f[14], line)?
        .into_iter()
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) => Ok((k.to_string(), v.to_string())),
            None => Err(Error::format(KIND, line, "extra field without '='")),
        })
        .collect::<Result<_>>()?;
    Ok(PublicationRecord {
        id: f[0].parse().map_err(|_| num(f[0], "id"))?,
        year: f[1].parse().map_err(|_| num(f[1], "year"))?,
        external_citation_count: f[2].parse().map_err(|_| num(f[2], "citation count"))?,
        authors: unescape_vec(f[3], line)?,
        first_author_lastname: unescape(f[4], line)?,
        title: unescape(f[5], line)?,
        source: unescape(f[6], line)?,
        source_key: unescape(f[7], line)?,
        volume: unescape_opt(f[8], line)?,
        begin_page: unescape_opt(f[9], line)?,
        doi: unescape_opt(f[10], line)?,
        abstract_text: unescape_opt(f[11], line)?,
        author_keywords: if f[12] == ABSENT {
            None
        } else {
            Some(unescape_vec(f[12], line)?)
        },
        cited_references: unescape_vec(f[13], line)?,
        extra_fields: extra,
    })
}

pub fn write_native(graph: &CitationGraph, report: &BuildReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "records {}", graph.node_count());
    for r in graph.records() {
        out.push_str(&record_line(r));
        out.push('\n');
    }
    let _ = writeln!(out, "edges {}", graph.edge_count());
    for (s, t) in graph.edges() {
        let _ = writeln!(out, "{s}\t{t}");
    }
    let _ = writeln!(out, "dropped {}", report.dropped.len());
    for d in &report.dropped {
        let _ = writeln!(out, "{}\t{}\t{}", d.citing, d.cited, d.reason);
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Split<'a, char>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l))
            }
            None => Err(Error::format(KIND, self.last + 1, "unexpected end of file")),
        }
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let (n, l) = self.next()?;
        l.strip_prefix(name)
            .and_then(|r| r.strip_prefix(' '))
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| Error::format(KIND, n, format!("expected '{name} <count>'")))
    }
}

fn pair(text: &str, line: usize) -> Result<(PubId, PubId, Option<&str>)> {
    let mut it = text.splitn(3, '\t');
    let bad = || Error::format(KIND, line, format!("malformed edge line {text:?}"));
    let a = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let b = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    Ok((a, b, it.next()))
}

pub fn read_native(text: &str) -> Result<(CitationGraph, BuildReport)> {
    let mut lines = Lines {
        inner: text.split('\n').enumerate(),
        last: 0,
    };
    let (n, magic) = lines.next()?;
    if magic != MAGIC {
        return Err(Error::format(KIND, n, format!("expected header {MAGIC:?}")));
    }
    let count = lines.section("records")?;
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = lines.next()?;
        records.push(parse_record(l, n)?);
    }
    let count = lines.section("edges")?;
    let mut edges = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = lines.next()?;
        let (a, b, rest) = pair(l, n)?;
        if rest.is_some() {
            return Err(Error::format(KIND, n, "edge line has extra fields"));
        }
        edges.push((a, b));
    }
    let count = lines.section("dropped")?;
    let mut report = BuildReport::default();
    for _ in 0..count {
        let (n, l) = lines.next()?;
        let (citing, cited, reason) = pair(l, n)?;
        let reason = reason
            .and_then(DropReason::parse)
            .ok_or_else(|| Error::format(KIND, n, "unknown drop reason"))?;
        report.dropped.push(DroppedEdge {
            citing,
            cited,
            reason,
        });
    }
    let (n, end) = lines.next()?;
    if end != "end" {
        return Err(Error::format(KIND, n, "expected 'end'"));
    }
    let (graph, rebuilt) = build_graph(records, &edges)?;
    if let Some(d) = rebuilt.dropped.first() {
        return Err(Error::format(
            KIND,
            0,
            format!(
                "edge {} -> {} violates graph invariants ({})",
                d.citing, d.cited, d.reason
            ),
        ));
    }
    Ok((graph, report))
}

pub fn save(path: impl AsRef<Path>, graph: &CitationGraph, report: &BuildReport) -> Result<()> {
    std::fs::write(path, write_native(graph, report))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<(CitationGraph, BuildReport)> {
    read_native(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> (CitationGraph, BuildReport) {
        let mut a = PublicationRecord::new(1, 2005)
            .with_authors(["Bhushan, B", "Liu | H"])
            .with_title("Tabs\tand\nnewlines \\ pipes |");
        a.doi = Some("10.1/a".into());
        a.author_keywords = Some(vec![]);
        a.abstract_text = Some(String::new());
        a.cited_references = vec!["Grill A, 1999, DIAM RELAT MATER".into()];
        a.extra_fields = vec![("UT".into(), "WOS:1=2".into())];
        let b = PublicationRecord::new(2, 1999);
        build_graph(vec![a, b], &[(PubId(1), PubId(2)), (PubId(2), PubId(1))]).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (g, r) = sample();
        assert_eq!(r.dropped.len(), 1);
        let text = write_native(&g, &r);
        let (g2, r2) = read_native(&text).unwrap();
        assert_eq!(g2, g);
        assert_eq!(r2, r);
        assert_eq!(write_native(&g2, &r2), text);
    }

    #[test]
    fn empty_vs_absent_optionals() {
        let (g, r) = sample();
        let (g2, _) = read_native(&write_native(&g, &r)).unwrap();
        let a = g2.record(PubId(1)).unwrap();
        assert_eq!(a.author_keywords, Some(vec![]));
        assert_eq!(a.abstract_text.as_deref(), Some(""));
        let b = g2.record(PubId(2)).unwrap();
        assert_eq!(b.author_keywords, None);
        assert_eq!(b.abstract_text, None);
    }

    #[test]
    fn malformed_files() {
        assert!(read_native("").is_err());
        assert!(read_native("citnet-graph 2\n").is_err());
        let (g, r) = sample();
        let text = write_native(&g, &r);
        assert!(read_native(&text.replace("end\n", "")).is_err());
        assert!(read_native(&text.replace("edges 1", "edges 2")).is_err());
        // An edge that contradicts the year order is rejected on load.
        let bad = text.replace("1\t2\n", "2\t1\n");
        assert!(read_native(&bad).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_text_round_trips(
            title in ".*",
            authors in prop::collection::vec(".*", 0..4),
            abstract_text in prop::option::of(".*"),
            keywords in prop::option::of(prop::collection::vec(".+", 1..3)),
        ) {
            let mut r = PublicationRecord::new(7, 2001).with_authors(authors).with_title(title);
            r.abstract_text = abstract_text;
            r.author_keywords = keywords;
            let (g, rep) = build_graph(vec![r], &[]).unwrap();
            let text = write_native(&g, &rep);
            let (g2, _) = read_native(&text).unwrap();
            prop_assert_eq!(g2.record(PubId(7)).unwrap(), g.record(PubId(7)).unwrap());
        }
    }
}
