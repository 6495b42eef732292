//! Search queries for marking publications.
//!
//! ```text
//! query   := or
//! or      := and ( "OR" and )*
//! and     := unary ( ["AND"] unary )*        adjacent terms are ANDed
//! unary   := "(" or ")" | term
//! term    := [ field ":" ] [ "*" ] ( word | '"' phrase '"' ) [ "*" ]
//! field   := title | abstract | keywords | authors | any
//! ```
//!
//! Matching is case-insensitive on text folded to ASCII with punctuation
//! (other than `-`) treated as whitespace. A trailing `*` matches the start
//! of a word, a leading `*` matches anywhere, no wildcard matches whole words.
//! See `docs/query.md`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::record::{PubId, PublicationRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Title,
    Abstract,
    AuthorKeywords,
    Authors,
}

impl Field {
    pub const ALL: [Field; 4] = [
        Field::Title,
        Field::Abstract,
        Field::AuthorKeywords,
        Field::Authors,
    ];

    fn from_prefix(s: &str) -> Option<Vec<Field>> {
        Some(match s.to_ascii_lowercase().as_str() {
            "title" | "ti" => vec![Field::Title],
            "abstract" | "ab" => vec![Field::Abstract],
            "keywords" | "author_keywords" | "de" => vec![Field::AuthorKeywords],
            "authors" | "author" | "au" => vec![Field::Authors],
            "any" => Field::ALL.to_vec(),
            _ => return None,
        })
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Field> {
        match Field::from_prefix(s.trim()) {
            Some(f) if f.len() == 1 => Ok(f[0]),
            _ => Err(Error::Query {
                position: 0,
                message: format!(
                    "unknown field {s:?} (expected title, abstract, keywords or authors)"
                ),
            }),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::AuthorKeywords => "keywords",
            Field::Authors => "authors",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOptions {
    /// Fields searched by terms without a `field:` prefix.
    pub default_fields: Vec<Field>,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            default_fields: vec![Field::Title, Field::Abstract, Field::AuthorKeywords],
        }
    }
}

impl QueryOptions {
    /// Unprefixed terms search titles only.
    pub fn title_only() -> Self {
        QueryOptions {
            default_fields: vec![Field::Title],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Word,
    Prefix,
    Substring,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub fields: Vec<Field>,
    /// Normalized pattern text, wildcards removed.
    pub pattern: String,
    pub mode: MatchMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Query {
    Term(Term),
    And(Vec<Query>),
    Or(Vec<Query>),
}

/// Lowercase ASCII fold; everything but letters, digits and `-` separates words.
pub(crate) fn normalize(text: &str) -> String {
    let ascii = deunicode::deunicode(text);
    let mut out = String::with_capacity(ascii.len());
    for word in ascii
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word.to_ascii_lowercase());
    }
    out
}

impl Term {
    fn matches_text(&self, text: &str) -> bool {
        let text = normalize(text);
        match self.mode {
            MatchMode::Substring => text.contains(&self.pattern),
            MatchMode::Prefix => format!(" {text}").contains(&format!(" {}", self.pattern)),
            MatchMode::Word => format!(" {text} ").contains(&format!(" {} ", self.pattern)),
        }
    }

    fn matches(&self, record: &PublicationRecord) -> bool {
        self.fields.iter().any(|field| match field {
            Field::Title => self.matches_text(&record.title),
            Field::Abstract => record
                .abstract_text
                .as_deref()
                .is_some_and(|a| self.matches_text(a)),
            Field::AuthorKeywords => record
                .author_keywords
                .iter()
                .flatten()
                .any(|k| self.matches_text(k)),
            Field::Authors => record.authors.iter().any(|a| self.matches_text(a)),
        })
    }
}

impl Query {
    pub fn matches(&self, record: &PublicationRecord) -> bool {
        match self {
            Query::Term(t) => t.matches(record),
            Query::And(qs) => qs.iter().all(|q| q.matches(record)),
            Query::Or(qs) => qs.iter().any(|q| q.matches(record)),
        }
    }
}

/// Ids of the publications in `graph` matched by `query`.
pub fn mark(graph: &CitationGraph, query: &Query) -> BTreeSet<PubId> {
    graph
        .records()
        .filter(|r| query.matches(r))
        .map(|r| r.id)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Or,
    And,
    Atom(String),
}

fn err(position: usize, message: impl Into<String>) -> Error {
    Error::Query {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            tokens.push((i, Token::Open));
            i += 1;
        } else if c == ')' {
            tokens.push((i, Token::Close));
            i += 1;
        } else {
            let start = i;
            let mut in_quote = false;
            while i < chars.len() {
                let c = chars[i];
                if c == '"' {
                    in_quote = !in_quote;
                } else if !in_quote && (c.is_whitespace() || c == '(' || c == ')') {
                    break;
                }
                i += 1;
            }
            if in_quote {
                return Err(err(start, "unterminated quote"));
            }
            let atom: String = chars[start..i].iter().collect();
            let tok = match atom.as_str() {
                a if a.eq_ignore_ascii_case("or") => Token::Or,
                a if a.eq_ignore_ascii_case("and") => Token::And,
                _ => Token::Atom(atom),
            };
            tokens.push((start, tok));
        }
    }
    Ok(tokens)
}

fn parse_term(pos: usize, atom: &str, options: &QueryOptions) -> Result<Term> {
    let mut fields = options.default_fields.clone();
    let mut body = atom;
    let mut offset = 0;
    if let Some((prefix, rest)) = atom.split_once(':') {
        if !prefix.contains('"') {
            fields = Field::from_prefix(prefix)
                .ok_or_else(|| err(pos, format!("unknown field {prefix:?}")))?;
            body = rest;
            offset = prefix.chars().count() + 1;
        }
    }
    let body_pos = pos + offset;
    let leading = body.starts_with('*');
    let inner = body.strip_prefix('*').unwrap_or(body);
    let (core, trailing) = if let Some(q) = inner.strip_prefix('"') {
        let end = q
            .find('"')
            .ok_or_else(|| err(body_pos, "unterminated quote"))?;
        let after = &q[end + 1..];
        match after {
            "" => (&q[..end], false),
            "*" => (&q[..end], true),
            _ => {
                return Err(err(
                    body_pos + inner.chars().count() - after.chars().count() + usize::from(leading),
                    "unexpected text after quoted phrase",
                ))
            }
        }
    } else {
        let trailing = inner.ends_with('*');
        let core = inner.strip_suffix('*').unwrap_or(inner);
        if let Some(p) = core.find(['"', '*']) {
            return Err(err(
                body_pos + usize::from(leading) + core[..p].chars().count(),
                "wildcards are only allowed at the start or end of a term",
            ));
        }
        (core, trailing)
    };
    let pattern = normalize(core);
    if pattern.is_empty() {
        return Err(err(body_pos, "empty search pattern"));
    }
    let mode = if leading {
        MatchMode::Substring
    } else if trailing {
        MatchMode::Prefix
    } else {
        MatchMode::Word
    };
    Ok(Term {
        fields,
        pattern,
        mode,
    })
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    options: &'a QueryOptions,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn or(&mut self) -> Result<Query> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Query::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Query> {
        let mut parts = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(Token::And) => {
                    self.pos += 1;
                    parts.push(self.unary()?);
                }
                Some(Token::Atom(_)) | Some(Token::Open) => parts.push(self.unary()?),
                _ => break,
            }
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Query::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Query> {
        let at = self.here();
        match self.tokens.get(self.pos).cloned() {
            Some((_, Token::Open)) => {
                self.pos += 1;
                let q = self.or()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(err(self.here(), "expected ')'"));
                }
                self.pos += 1;
                Ok(q)
            }
            Some((p, Token::Atom(a))) => {
                self.pos += 1;
                Ok(Query::Term(parse_term(p, &a, self.options)?))
            }
            Some((_, Token::Or)) | Some((_, Token::And)) => {
                Err(err(at, "operator without left operand"))
            }
            Some((_, Token::Close)) => Err(err(at, "unexpected ')'")),
            None => Err(err(at, "expected a search term")),
        }
    }
}

/// Parses a query; errors carry the character position of the problem.
pub fn parse_query(text: &str, options: &QueryOptions) -> Result<Query> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(err(0, "empty query"));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
        options,
    };
    let q = parser.or()?;
    if parser.pos < parser.tokens.len() {
        return Err(err(parser.here(), "unexpected token"));
    }
    Ok(q)
}
