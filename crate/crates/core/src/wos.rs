//! Reader for Web of Science tab-delimited exports.
//!
//! The first line holds the field tags, every following non-blank line is
//! one record. Multi-valued cells (AU, DE, CR) separate values with `"; "`.
//! Input is UTF-8 with an optional byte-order mark; `\r\n` line endings are
//! accepted. See `docs/formats.md` for the full description.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{lastname_of, source_key, PubId, PublicationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// A per-row problem found during ingest. `Error` rows were skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line number in the input (the header is line 1).
    pub line: usize,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "line {}: {}: {}", self.line, sev, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    pub min_year: i32,
    pub max_year: i32,
    /// Id given to the first accepted record; later records count up from it.
    pub first_id: u32,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            min_year: 1500,
            max_year: 2100,
            first_id: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedFile {
    pub records: Vec<PublicationRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

const KNOWN_TAGS: &[&str] = &[
    "AU", "TI", "SO", "PY", "VL", "BP", "DI", "AB", "DE", "TC", "CR",
];

fn looks_like_header(line: &str) -> bool {
    let mut any = false;
    for tag in line.split('\t') {
        let tag = tag.trim();
        if tag.is_empty() {
            continue;
        }
        let ok = (2..=3).contains(&tag.len())
            && tag
                .bytes()
                .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit());
        if !ok {
            return false;
        }
        any = true;
    }
    any
}

fn split_multi(cell: &str) -> Vec<String> {
    cell.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn opt(cell: &str) -> Option<String> {
    let t = cell.trim();
    (!t.is_empty()).then(|| t.to_string())
}

/// Reads a whole export from `reader` and parses it.
pub fn read_wos<R: Read>(mut reader: R, options: &IngestOptions) -> Result<ParsedFile> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_wos_file(&bytes, options)
}

/// Parses export bytes into records (file order) and row diagnostics.
pub fn parse_wos_file(content: &[u8], options: &IngestOptions) -> Result<ParsedFile> {
    let text = std::str::from_utf8(content).map_err(|e| Error::Encoding(e.valid_up_to()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = match lines.next() {
        Some(h) if looks_like_header(h) => h,
        _ => return Err(Error::MissingHeader),
    };
    let tags: Vec<&str> = header.split('\t').map(str::trim).collect();
    let column: HashMap<&str, usize> = tags
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, t)| !t.is_empty())
        .map(|(i, t)| (*t, i))
        .collect();
    let width = tags
        .iter()
        .rposition(|t| !t.is_empty())
        .map_or(0, |i| i + 1);

    let mut out = ParsedFile::default();
    let mut next_id = options.first_id;
    let mut doi_seen: HashMap<String, usize> = HashMap::new();

    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() > width && cells[width..].iter().any(|c| !c.trim().is_empty()) {
            out.diagnostics.push(Diagnostic {
                line: line_no,
                severity: Severity::Error,
                message: format!(
                    "column count mismatch: {} cells for {} header tags",
                    cells.len(),
                    width
                ),
            });
            continue;
        }
        let cell = |tag: &str| -> &str {
            column
                .get(tag)
                .and_then(|&i| cells.get(i))
                .copied()
                .unwrap_or("")
        };

        let py = cell("PY").trim();
        let year = if py.is_empty() {
            out.diagnostics.push(Diagnostic {
                line: line_no,
                severity: Severity::Error,
                message: "invalid year: missing PY".into(),
            });
            continue;
        } else {
            match py.parse::<i32>() {
                Ok(y) if (options.min_year..=options.max_year).contains(&y) => y,
                Ok(y) => {
                    out.diagnostics.push(Diagnostic {
                        line: line_no,
                        severity: Severity::Error,
                        message: format!(
                            "invalid year: {y} outside {}-{}",
                            options.min_year, options.max_year
                        ),
                    });
                    continue;
                }
                Err(_) => {
                    out.diagnostics.push(Diagnostic {
                        line: line_no,
                        severity: Severity::Error,
                        message: format!("invalid year: {py:?}"),
                    });
                    continue;
                }
            }
        };

        let tc = cell("TC").trim();
        let external_citation_count = if tc.is_empty() {
            0
        } else {
            match tc.parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    out.diagnostics.push(Diagnostic {
                        line: line_no,
                        severity: Severity::Error,
                        message: format!("invalid times cited: {tc:?}"),
                    });
                    continue;
                }
            }
        };

        let authors = split_multi(cell("AU"));
        let first_author_lastname = authors.first().map(|a| lastname_of(a)).unwrap_or_default();
        let source = cell("SO").trim().to_string();
        let j9 = cell("J9").trim();
        let skey = source_key(if j9.is_empty() { &source } else { j9 });
        let doi = opt(cell("DI")).map(|d| d.to_lowercase());
        let keywords = split_multi(cell("DE"));

        let extra_fields = tags
            .iter()
            .enumerate()
            .filter(|(i, t)| !t.is_empty() && !KNOWN_TAGS.contains(t) && column.get(*t) == Some(i))
            .filter_map(|(i, t)| {
                let v = cells.get(i)?.trim();
                (!v.is_empty()).then(|| (t.to_string(), v.to_string()))
            })
            .collect();

        let id = PubId(next_id);
        next_id += 1;

        if let Some(d) = &doi {
            if let Some(prev) = doi_seen.get(d) {
                out.diagnostics.push(Diagnostic {
                    line: line_no,
                    severity: Severity::Warning,
                    message: format!("duplicate DOI {d} (also on line {prev}); both records kept"),
                });
            } else {
                doi_seen.insert(d.clone(), line_no);
            }
        }

        out.records.push(PublicationRecord {
            id,
            authors,
            first_author_lastname,
            title: cell("TI").trim().to_string(),
            source,
            source_key: skey,
            year,
            volume: opt(cell("VL")),
            begin_page: opt(cell("BP")),
            doi,
            abstract_text: opt(cell("AB")),
            author_keywords: (!keywords.is_empty()).then_some(keywords),
            external_citation_count,
            cited_references: split_multi(cell("CR")),
            extra_fields,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "PT\tAU\tTI\tSO\tJ9\tPY\tVL\tBP\tDI\tAB\tDE\tTC\tCR\tUT\n";

    fn parse(s: &str) -> ParsedFile {
        parse_wos_file(s.as_bytes(), &IngestOptions::default()).unwrap()
    }

    #[test]
    fn two_rows() {
        let text = format!(
            "{HEADER}J\tBhushan, B; Liu, H\tNanotribology of SAMs\tULTRAMICROSCOPY\tULTRAMICROSCOPY\t2002\t91\t185\t10.1016/X\t\tnanotribology; AFM\t17\tGrill A, 1999, DIAM RELAT MATER, V8, P428\tWOS:1\n\
             J\tGrill, A\tDiamond-like carbon\tDIAMOND AND RELATED MATERIALS\tDIAM RELAT MATER\t1999\t8\t428\t\tA review.\t\t\t\tWOS:2\n"
        );
        let p = parse(&text);
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        assert_eq!(p.records.len(), 2);
        let a = &p.records[0];
        assert_eq!(a.id, PubId(1));
        assert_eq!(a.authors, vec!["Bhushan, B", "Liu, H"]);
        assert_eq!(a.first_author_lastname, "bhushan");
        assert_eq!(a.doi.as_deref(), Some("10.1016/x"));
        assert_eq!(a.external_citation_count, 17);
        assert_eq!(
            a.author_keywords,
            Some(vec!["nanotribology".to_string(), "AFM".to_string()])
        );
        assert_eq!(a.cited_references.len(), 1);
        assert_eq!(
            a.extra_fields,
            vec![
                ("PT".to_string(), "J".to_string()),
                ("J9".to_string(), "ULTRAMICROSCOPY".to_string()),
                ("UT".to_string(), "WOS:1".to_string()),
            ]
        );
        let b = &p.records[1];
        assert_eq!(b.id, PubId(2));
        assert_eq!(b.source_key, "diam relat mater");
        assert_eq!(b.external_citation_count, 0);
        assert_eq!(b.abstract_text.as_deref(), Some("A review."));
        assert_eq!(b.author_keywords, None);
        assert_eq!(b.volume.as_deref(), Some("8"));
    }

    #[test]
    fn header_only() {
        let p = parse(HEADER);
        assert!(p.records.is_empty());
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn invalid_year_row_skipped() {
        let text = format!(
            "{HEADER}J\tA, B\tOne\tWEAR\tWEAR\tn/a\t\t\t\t\t\t\t\t\nJ\tC, D\tTwo\tWEAR\tWEAR\t2001\t\t\t\t\t\t\t\t\n"
        );
        let p = parse(&text);
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].title, "Two");
        assert_eq!(p.records[0].id, PubId(1));
        assert_eq!(p.diagnostics.len(), 1);
        assert_eq!(p.diagnostics[0].line, 2);
        assert_eq!(p.diagnostics[0].severity, Severity::Error);
        assert!(p.diagnostics[0].message.contains("invalid year"));
    }

    #[test]
    fn out_of_range_year_rejected() {
        let text = format!("{HEADER}J\tA, B\tOld\tX\tX\t1200\t\t\t\t\t\t\t\t\n");
        let p = parse(&text);
        assert!(p.records.is_empty());
        assert!(p.diagnostics[0].message.contains("invalid year"));
    }

    #[test]
    fn missing_header_is_fatal() {
        assert!(matches!(
            parse_wos_file(b"", &IngestOptions::default()),
            Err(Error::MissingHeader)
        ));
        assert!(matches!(
            parse_wos_file(b"Bhushan, B\tsome title\n", &IngestOptions::default()),
            Err(Error::MissingHeader)
        ));
    }

    #[test]
    fn bom_and_crlf() {
        let text = "\u{feff}AU\tTI\tPY\t\r\nSmith, J\tT\t2000\t\r\n";
        let p = parse(text);
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].year, 2000);
        assert_eq!(p.records[0].title, "T");
    }

    #[test]
    fn duplicate_doi_warns_and_keeps_both() {
        let text = "AU\tPY\tDI\nA, B\t2000\t10.1/X\nC, D\t2001\t10.1/x\n";
        let p = parse(text);
        assert_eq!(p.records.len(), 2);
        assert_eq!(p.diagnostics.len(), 1);
        assert_eq!(p.diagnostics[0].severity, Severity::Warning);
        assert_eq!(p.diagnostics[0].line, 3);
    }

    #[test]
    fn extra_cells_are_malformed() {
        let text = "AU\tPY\nA, B\t2000\tsurplus\n";
        let p = parse(text);
        assert!(p.records.is_empty());
        assert!(p.diagnostics[0].message.contains("column count"));
    }

    #[test]
    fn invalid_utf8_is_fatal() {
        assert!(matches!(
            parse_wos_file(b"AU\tPY\n\xff\xfe\t2000\n", &IngestOptions::default()),
            Err(Error::Encoding(_))
        ));
    }
}
