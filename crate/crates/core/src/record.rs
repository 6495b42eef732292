//! Bibliographic records and the normalization keys used to match cited
//! references against them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Stable publication identifier, assigned in file order at ingest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PubId(pub u32);

impl fmt::Display for PubId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for PubId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(PubId)
    }
}

impl From<u32> for PubId {
    fn from(v: u32) -> Self {
        PubId(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub id: PubId,
    pub authors: Vec<String>,
    pub first_author_lastname: String,
    pub title: String,
    pub source: String,
    /// Normalized abbreviated source title (J9 when present, else SO).
    pub source_key: String,
    pub year: i32,
    pub volume: Option<String>,
    pub begin_page: Option<String>,
    pub doi: Option<String>,
    pub abstract_text: Option<String>,
    pub author_keywords: Option<Vec<String>>,
    pub external_citation_count: u64,
    pub cited_references: Vec<String>,
    /// Columns outside the parsed repertoire, kept as (tag, value).
    pub extra_fields: Vec<(String, String)>,
}

impl PublicationRecord {
    /// Minimal record with only an id and a year; every other field empty.
    pub fn new(id: impl Into<PubId>, year: i32) -> Self {
        PublicationRecord {
            id: id.into(),
            authors: Vec::new(),
            first_author_lastname: String::new(),
            title: String::new(),
            source: String::new(),
            source_key: String::new(),
            year,
            volume: None,
            begin_page: None,
            doi: None,
            abstract_text: None,
            author_keywords: None,
            external_citation_count: 0,
            cited_references: Vec::new(),
            extra_fields: Vec::new(),
        }
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn with_authors<I, S>(mut self, authors: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.authors = authors.into_iter().map(Into::into).collect();
        self.first_author_lastname = self
            .authors
            .first()
            .map(|a| lastname_of(a))
            .unwrap_or_default();
        self
    }

    /// Normalized "lastname initials" key of the first author.
    pub fn author_key(&self) -> Option<String> {
        self.authors
            .first()
            .map(|a| author_key(a))
            .filter(|k| !k.is_empty())
    }
}

/// Last name of a WoS author string ("Bhushan, B" -> "bhushan"), lowercased.
pub fn lastname_of(author: &str) -> String {
    let name = author.trim();
    let last = match name.split_once(',') {
        Some((last, _)) => last,
        None => name.split_whitespace().next().unwrap_or(""),
    };
    last.trim().to_lowercase()
}

/// ASCII-folds, lowercases, drops punctuation and collapses whitespace.
///
/// `keep` lists punctuation characters that survive as-is.
fn fold(text: &str, keep: &[char]) -> String {
    let ascii = deunicode::deunicode(text);
    let mut out = String::with_capacity(ascii.len());
    let mut pending_space = false;
    for c in ascii.chars() {
        if c.is_ascii_alphanumeric() || keep.contains(&c) {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c.to_ascii_lowercase());
        } else if c.is_whitespace() {
            pending_space = true;
        }
    }
    out
}

/// Author key: "Bhushan, B" and "Bhushan B" both become "bhushan b".
pub fn author_key(author: &str) -> String {
    fold(author, &[])
}

/// Source key: lowercase, punctuation stripped, whitespace collapsed.
pub fn source_key(source: &str) -> String {
    fold(source, &[])
}

/// Parsed entry of a WoS CR cell.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedRef {
    pub raw: String,
    pub author_key: Option<String>,
    pub year: Option<i32>,
    pub source_key: Option<String>,
    pub volume: Option<String>,
    pub begin_page: Option<String>,
    pub doi: Option<String>,
}

impl CitedRef {
    /// A reference can be matched when it carries a DOI or both an author key and a year.
    pub fn is_match_eligible(&self) -> bool {
        self.doi.is_some() || (self.author_key.is_some() && self.year.is_some())
    }
}

fn is_year(seg: &str) -> Option<i32> {
    if seg.len() == 4 && seg.bytes().all(|b| b.is_ascii_digit()) {
        seg.parse().ok()
    } else {
        None
    }
}

fn tagged(seg: &str, tag: char) -> Option<&str> {
    let rest = seg.strip_prefix(tag)?;
    if rest.starts_with(|c: char| c.is_ascii_alphanumeric()) && !rest.contains(' ') {
        Some(rest)
    } else {
        None
    }
}

fn clean_doi(doi: &str) -> Option<String> {
    let doi = doi.trim().trim_start_matches('[');
    let doi = doi
        .split(',')
        .next()
        .unwrap_or("")
        .trim()
        .trim_end_matches(']');
    let doi = doi.trim().to_lowercase();
    (!doi.is_empty()).then_some(doi)
}

/// Parses one CR entry ("Author, Year, Source, Vvol, Ppage, DOI doi").
///
/// Total: unrecognized segments are ignored.
pub fn parse_cited_reference(raw: &str) -> CitedRef {
    let mut cref = CitedRef {
        raw: raw.to_string(),
        ..CitedRef::default()
    };
    let text = raw.trim();
    if text.is_empty() {
        return cref;
    }
    // A bracketed DOI list may itself contain ", ", so peel the DOI off first.
    let (head, doi_part) = match text.find("DOI ") {
        Some(pos) if pos == 0 || text[..pos].ends_with(", ") => (
            text[..pos].trim_end_matches([',', ' ']),
            Some(&text[pos + 4..]),
        ),
        _ => (text, None),
    };
    if let Some(d) = doi_part {
        cref.doi = clean_doi(d);
    }

    let mut seen_year = false;
    for (i, seg) in head.split(',').map(str::trim).enumerate() {
        if seg.is_empty() {
            continue;
        }
        if !seen_year {
            if let Some(y) = is_year(seg) {
                cref.year = Some(y);
                seen_year = true;
                continue;
            }
            if i == 0 {
                let key = author_key(seg);
                if !key.is_empty() {
                    cref.author_key = Some(key);
                }
            }
            continue;
        }
        if cref.volume.is_none() {
            if let Some(v) = tagged(seg, 'V') {
                cref.volume = Some(v.to_string());
                continue;
            }
        }
        if cref.begin_page.is_none() {
            if let Some(p) = tagged(seg, 'P') {
                cref.begin_page = Some(p.to_string());
                continue;
            }
        }
        if cref.source_key.is_none() && cref.volume.is_none() && cref.begin_page.is_none() {
            let key = source_key(seg);
            if !key.is_empty() {
                cref.source_key = Some(key);
            }
        }
    }
    cref
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_reference() {
        let c = parse_cited_reference(
            "Bhushan B, 1999, DIAM RELAT MATER, V8, P1985, DOI 10.1016/s0925-9635(99)00158-2",
        );
        assert_eq!(c.author_key.as_deref(), Some("bhushan b"));
        assert_eq!(c.year, Some(1999));
        assert_eq!(c.source_key.as_deref(), Some("diam relat mater"));
        assert_eq!(c.volume.as_deref(), Some("8"));
        assert_eq!(c.begin_page.as_deref(), Some("1985"));
        assert_eq!(c.doi.as_deref(), Some("10.1016/s0925-9635(99)00158-2"));
        assert!(c.is_match_eligible());
    }

    #[test]
    fn empty_reference_is_unmatchable() {
        let c = parse_cited_reference("");
        assert_eq!(
            c,
            CitedRef {
                raw: String::new(),
                ..CitedRef::default()
            }
        );
        assert!(!c.is_match_eligible());
    }

    #[test]
    fn author_year_only() {
        let c = parse_cited_reference("Anon, 2001");
        assert_eq!(c.author_key.as_deref(), Some("anon"));
        assert_eq!(c.year, Some(2001));
        assert_eq!(c.source_key, None);
        assert_eq!(c.volume, None);
        assert_eq!(c.begin_page, None);
        assert_eq!(c.doi, None);
        assert!(c.is_match_eligible());
    }

    #[test]
    fn bracketed_doi_list_takes_first() {
        let c = parse_cited_reference(
            "Erdemir A, 2001, SURF COAT TECH, V146, P292, DOI [10.1016/A, 10.1016/B]",
        );
        assert_eq!(c.doi.as_deref(), Some("10.1016/a"));
        assert_eq!(c.begin_page.as_deref(), Some("292"));
    }

    #[test]
    fn missing_author() {
        let c = parse_cited_reference("1998, WEAR, V215, P1");
        assert_eq!(c.author_key, None);
        assert_eq!(c.year, Some(1998));
        assert_eq!(c.source_key.as_deref(), Some("wear"));
        assert!(!c.is_match_eligible());
    }

    #[test]
    fn author_key_folds_diacritics_and_punctuation() {
        assert_eq!(author_key("Dörfel, I"), "dorfel i");
        assert_eq!(author_key("O'Neill,   JP"), "oneill jp");
        assert_eq!(author_key("Le Mogne T"), "le mogne t");
        assert_eq!(source_key("Surf. Coat. Technol."), "surf coat technol");
    }

    #[test]
    fn lastname() {
        assert_eq!(lastname_of("Bhushan, B"), "bhushan");
        assert_eq!(lastname_of("Le Mogne, T"), "le mogne");
        assert_eq!(lastname_of("Grill A"), "grill");
    }
}
