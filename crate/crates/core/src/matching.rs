//! Resolution of cited references to records of the same ingest run.
//!
//! Tiers, tried in order until one yields a candidate: exact DOI, then
//! (author key, year, source key), then (author key, year). A tier with one
//! candidate produces an edge, a tier with several produces none and counts
//! as ambiguous.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::record::{parse_cited_reference, CitedRef, PubId, PublicationRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    /// References resolved to exactly one other record.
    pub matched: usize,
    pub matched_by_doi: usize,
    pub matched_by_source: usize,
    pub matched_by_author_year: usize,
    /// Eligible references with no candidate.
    pub unmatched: usize,
    /// References with two or more candidates in the deciding tier.
    pub ambiguous: usize,
    /// References lacking both a DOI and an author/year pair.
    pub unmatchable: usize,
    /// References whose only candidate was the citing record itself.
    pub self_matches: usize,
    /// Resolved references that repeated an edge already emitted.
    pub duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tier {
    Doi,
    Source,
    AuthorYear,
}

enum Outcome {
    Unique(PubId, Tier),
    Ambiguous,
    SelfOnly,
    None,
}

struct Index<'a> {
    by_doi: HashMap<&'a str, Vec<PubId>>,
    by_triple: HashMap<(String, i32, &'a str), Vec<PubId>>,
    by_pair: HashMap<(String, i32), Vec<PubId>>,
}

impl<'a> Index<'a> {
    fn new(records: &'a [PublicationRecord]) -> Self {
        let mut by_doi: HashMap<&str, Vec<PubId>> = HashMap::new();
        let mut by_triple: HashMap<(String, i32, &str), Vec<PubId>> = HashMap::new();
        let mut by_pair: HashMap<(String, i32), Vec<PubId>> = HashMap::new();
        for r in records {
            if let Some(doi) = &r.doi {
                by_doi.entry(doi.as_str()).or_default().push(r.id);
            }
            if let Some(key) = r.author_key() {
                if !r.source_key.is_empty() {
                    by_triple
                        .entry((key.clone(), r.year, r.source_key.as_str()))
                        .or_default()
                        .push(r.id);
                }
                by_pair.entry((key, r.year)).or_default().push(r.id);
            }
        }
        Index {
            by_doi,
            by_triple,
            by_pair,
        }
    }

    fn resolve(&self, citing: PubId, cref: &CitedRef) -> Outcome {
        let mut saw_self = false;
        let mut decide = |cands: Option<&Vec<PubId>>, tier: Tier| -> Option<Outcome> {
            let cands = cands?;
            let others: Vec<PubId> = cands.iter().copied().filter(|&c| c != citing).collect();
            match others.len() {
                0 => {
                    saw_self |= !cands.is_empty();
                    None
                }
                1 => Some(Outcome::Unique(others[0], tier)),
                _ => Some(Outcome::Ambiguous),
            }
        };

        if let Some(doi) = &cref.doi {
            if let Some(o) = decide(self.by_doi.get(doi.as_str()), Tier::Doi) {
                return o;
            }
        }
        if let (Some(author), Some(year)) = (&cref.author_key, cref.year) {
            if let Some(source) = &cref.source_key {
                let key = (author.clone(), year, source.as_str());
                if let Some(o) = decide(self.by_triple.get(&key), Tier::Source) {
                    return o;
                }
            }
            if let Some(o) = decide(self.by_pair.get(&(author.clone(), year)), Tier::AuthorYear) {
                return o;
            }
        }
        if saw_self {
            Outcome::SelfOnly
        } else {
            Outcome::None
        }
    }
}

/// Resolves every record's cited references against the record set.
///
/// Returns edges `(citing, cited)` sorted and deduplicated.
pub fn match_references(records: &[PublicationRecord]) -> (Vec<(PubId, PubId)>, MatchReport) {
    let index = Index::new(records);
    let mut report = MatchReport::default();
    let mut edges = BTreeSet::new();
    for r in records {
        for raw in &r.cited_references {
            let cref = parse_cited_reference(raw);
            if !cref.is_match_eligible() {
                report.unmatchable += 1;
                continue;
            }
            match index.resolve(r.id, &cref) {
                Outcome::Unique(target, tier) => {
                    report.matched += 1;
                    match tier {
                        Tier::Doi => report.matched_by_doi += 1,
                        Tier::Source => report.matched_by_source += 1,
                        Tier::AuthorYear => report.matched_by_author_year += 1,
                    }
                    if !edges.insert((r.id, target)) {
                        report.duplicates += 1;
                    }
                }
                Outcome::Ambiguous => report.ambiguous += 1,
                Outcome::SelfOnly => report.self_matches += 1,
                Outcome::None => report.unmatched += 1,
            }
        }
    }
    (edges.into_iter().collect(), report)
}
