use std::collections::{BTreeMap, HashMap, HashSet};

use super::{tokenize, EvidenceDoc, IndexError};

/// BM25 saturation and length-normalisation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Immutable inverted index over an evidence corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Index {
    pub(crate) docs: Vec<EvidenceDoc>,
    pub(crate) postings: BTreeMap<String, Vec<Posting>>,
    pub(crate) doc_lengths: Vec<u32>,
    pub(crate) avg_doc_len: f64,
    pub(crate) params: Bm25Params,
}

/// Lucene-style inverse document frequency, positive for every `df` in `1..=n`.
pub fn idf(doc_count: u32, df: u32) -> f64 {
    let n = f64::from(doc_count);
    let df = f64::from(df);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Contribution of one term to one document's score.
pub fn term_score(params: Bm25Params, idf: f64, tf: u32, doc_len: u32, avg_doc_len: f64) -> f64 {
    let tf = f64::from(tf);
    let norm = params.k1 * (1.0 - params.b + params.b * f64::from(doc_len) / avg_doc_len);
    idf * tf / (tf + norm)
}

/// Tokenizes and indexes `docs`; ordinals follow input order.
pub fn build_index(docs: Vec<EvidenceDoc>, params: Bm25Params) -> Result<Bm25Index, IndexError> {
    if docs.is_empty() {
        return Err(IndexError::EmptyCorpus);
    }
    let mut seen = HashSet::new();
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut doc_lengths = Vec::with_capacity(docs.len());
    for (ordinal, doc) in docs.iter().enumerate() {
        if doc.text.trim().is_empty() {
            return Err(IndexError::EmptyDocument(doc.doc_id.clone()));
        }
        if !seen.insert(doc.doc_id.as_str()) {
            return Err(IndexError::DuplicateDocId(doc.doc_id.clone()));
        }
        let tokens = tokenize(&doc.text);
        doc_lengths.push(tokens.len() as u32);
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for t in tokens {
            *counts.entry(t).or_default() += 1;
        }
        for (term, tf) in counts {
            postings.entry(term).or_default().push(Posting {
                doc: ordinal as u32,
                tf,
            });
        }
    }
    let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
    if total == 0 {
        return Err(IndexError::NoTokens);
    }
    let avg_doc_len = total as f64 / doc_lengths.len() as f64;
    Ok(Bm25Index {
        docs,
        postings,
        doc_lengths,
        avg_doc_len,
        params,
    })
}

impl Bm25Index {
    pub fn doc_count(&self) -> u32 {
        self.docs.len() as u32
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn docs(&self) -> &[EvidenceDoc] {
        &self.docs
    }

    pub fn postings(&self, term: &str) -> Option<&[Posting]> {
        self.postings.get(term).map(Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn doc(&self, doc_id: &str) -> Option<&EvidenceDoc> {
        self.docs.iter().find(|d| d.doc_id == doc_id)
    }

    /// Scores every document sharing at least one query term and returns the
    /// best `top_k`, highest score first, ties by ascending doc_id.
    ///
    /// Repeated query terms count once.
    pub fn search(&self, query: &str, top_k: usize) -> Vec<(String, f64)> {
        let mut terms = tokenize(query);
        let mut seen = HashSet::new();
        terms.retain(|t| seen.insert(t.clone()));

        let mut acc: HashMap<u32, f64> = HashMap::new();
        for term in &terms {
            let Some(list) = self.postings.get(term) else {
                continue;
            };
            let w = idf(self.doc_count(), list.len() as u32);
            for p in list {
                let len = self.doc_lengths[p.doc as usize];
                *acc.entry(p.doc).or_insert(0.0) += term_score(self.params, w, p.tf, len, self.avg_doc_len);
            }
        }
        let mut hits: Vec<(String, f64)> = acc
            .into_iter()
            .map(|(ord, s)| (self.docs[ord as usize].doc_id.clone(), s))
            .collect();
        sort_hits(&mut hits);
        hits.truncate(top_k);
        hits
    }

    /// Candidate documents for reranking, in BM25 order.
    pub fn search_docs(&self, query: &str, top_k: usize) -> Vec<EvidenceDoc> {
        self.search(query, top_k)
            .into_iter()
            .filter_map(|(id, _)| self.doc(&id).cloned())
            .collect()
    }
}

pub(crate) fn sort_hits(hits: &mut [(String, f64)]) {
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}
