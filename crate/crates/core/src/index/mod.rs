//! Inverted index per snapshot: construction, persistence, BM25 search and
//! tf-idf term selection.

mod persist;
mod scoring;
mod tokenize;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use persist::{FORMAT_MAGIC, FORMAT_VERSION, INDEX_FILE};
pub use scoring::{tfidf_weight, Bm25Params};
pub use tokenize::{tokenize, Tokenizer, TokenizerConfig};

use crate::error::{Error, Result};
use crate::formats::{Document, Query};
use crate::scalar::Scalar;

/// Directory holding the index of `snapshot_id` under `root`.
pub fn index_dir(root: &Path, snapshot_id: &str) -> PathBuf {
    root.join(format!("index-{snapshot_id}"))
}

/// Corpus statistics of an index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexStats {
    pub n_docs: usize,
    pub n_terms: usize,
    pub avg_doc_len: f64,
    pub total_tokens: u64,
}

/// Terms chosen by [`IndexHandle::tfidf_top_terms`].
#[derive(Debug, Clone, PartialEq)]
pub struct TermSelection {
    pub terms: Vec<(String, f64)>,
    /// Requested documents not present in the index.
    pub missing_docs: usize,
}

/// An immutable, searchable inverted index.
///
/// Documents are numbered in ascending id order, so postings ordered by
/// document number are ordered by document id.
#[derive(Debug, Clone)]
pub struct IndexHandle {
    snapshot_id: String,
    tokenizer: Tokenizer,
    doc_ids: Vec<String>,
    doc_lens: Vec<u32>,
    terms: Vec<String>,
    postings: Vec<Vec<(u32, u32)>>,
    // Derived on construction.
    doc_lookup: HashMap<String, u32>,
    term_lookup: HashMap<String, u32>,
    forward: Vec<Vec<(u32, u32)>>,
    avg_doc_len: f64,
    path: Option<PathBuf>,
}

impl PartialEq for IndexHandle {
    fn eq(&self, other: &Self) -> bool {
        self.snapshot_id == other.snapshot_id
            && self.tokenizer.config() == other.tokenizer.config()
            && self.doc_ids == other.doc_ids
            && self.doc_lens == other.doc_lens
            && self.terms == other.terms
            && self.postings == other.postings
    }
}

impl IndexHandle {
    /// Builds an in-memory index. Tokenization runs in parallel.
    pub fn build<I>(snapshot_id: &str, docs: I, config: TokenizerConfig) -> Result<IndexHandle>
    where
        I: IntoIterator<Item = Document>,
    {
        let tokenizer = Tokenizer::new(config);
        let docs: Vec<Document> = docs.into_iter().collect();
        let mut analyzed: Vec<(String, u32, BTreeMap<String, u32>)> = docs
            .into_par_iter()
            .map(|doc| {
                let tokens = tokenizer.tokenize(&doc.contents);
                let len = u32::try_from(tokens.len()).expect("document length fits u32");
                let mut tf = BTreeMap::new();
                for t in tokens {
                    *tf.entry(t).or_insert(0u32) += 1;
                }
                (doc.id, len, tf)
            })
            .collect();
        analyzed.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = analyzed.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateId {
                kind: "document",
                id: w[0].0.clone(),
            });
        }

        let mut vocabulary: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        let mut doc_ids = Vec::with_capacity(analyzed.len());
        let mut doc_lens = Vec::with_capacity(analyzed.len());
        for (doc_no, (id, len, tf)) in analyzed.into_iter().enumerate() {
            for (term, count) in tf {
                vocabulary.entry(term).or_default().push((doc_no as u32, count));
            }
            doc_ids.push(id);
            doc_lens.push(len);
        }
        let (terms, postings) = vocabulary.into_iter().unzip();
        Ok(IndexHandle::assemble(
            snapshot_id.to_string(),
            tokenizer,
            doc_ids,
            doc_lens,
            terms,
            postings,
            None,
        ))
    }

    pub(crate) fn assemble(
        snapshot_id: String,
        tokenizer: Tokenizer,
        doc_ids: Vec<String>,
        doc_lens: Vec<u32>,
        terms: Vec<String>,
        postings: Vec<Vec<(u32, u32)>>,
        path: Option<PathBuf>,
    ) -> IndexHandle {
        let doc_lookup = doc_ids.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect();
        let term_lookup = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let mut forward = vec![Vec::new(); doc_ids.len()];
        for (term_no, list) in postings.iter().enumerate() {
            for &(doc, tf) in list {
                forward[doc as usize].push((term_no as u32, tf));
            }
        }
        let total: u64 = doc_lens.iter().map(|&l| l as u64).sum();
        let avg_doc_len = if doc_ids.is_empty() {
            0.0
        } else {
            total as f64 / doc_ids.len() as f64
        };
        IndexHandle {
            snapshot_id,
            tokenizer,
            doc_ids,
            doc_lens,
            terms,
            postings,
            doc_lookup,
            term_lookup,
            forward,
            avg_doc_len,
            path,
        }
    }

    pub fn snapshot_id(&self) -> &str {
        &self.snapshot_id
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    /// Where the index was persisted or opened from.
    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            n_docs: self.doc_ids.len(),
            n_terms: self.terms.len(),
            avg_doc_len: self.avg_doc_len,
            total_tokens: self.doc_lens.iter().map(|&l| l as u64).sum(),
        }
    }

    pub fn df(&self, term: &str) -> usize {
        self.term_lookup
            .get(term)
            .map_or(0, |&t| self.postings[t as usize].len())
    }

    /// Total occurrences of `term` across the collection.
    pub fn collection_frequency(&self, term: &str) -> u64 {
        self.term_lookup
            .get(term)
            .map_or(0, |&t| self.postings[t as usize].iter().map(|&(_, tf)| tf as u64).sum())
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<u32> {
        self.doc_lookup.get(doc_id).map(|&d| self.doc_lens[d as usize])
    }

    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.doc_lookup.contains_key(doc_id)
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// `(doc_id, tf)` postings of a term, ascending by doc id.
    pub fn postings(&self, term: &str) -> Vec<(&str, u32)> {
        self.term_lookup.get(term).map_or_else(Vec::new, |&t| {
            self.postings[t as usize]
                .iter()
                .map(|&(d, tf)| (self.doc_ids[d as usize].as_str(), tf))
                .collect()
        })
    }

    /// BM25 over the distinct query terms. Results are sorted by score
    /// descending then doc id ascending; zero-score documents are dropped.
    pub fn search<S: Scalar>(&self, text: &str, k: usize, params: &Bm25Params<S>) -> Result<Vec<(String, S)>> {
        if k == 0 {
            return Err(Error::InvalidArgument("search depth must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        let terms: Vec<u32> = self
            .tokenizer
            .tokenize(text)
            .into_iter()
            .filter(|t| seen.insert(t.clone()))
            .filter_map(|t| self.term_lookup.get(&t).copied())
            .collect();
        let n = self.doc_ids.len();
        let avg = S::lit(self.avg_doc_len);
        let mut scores = vec![S::zero(); n];
        let mut touched = Vec::new();
        for t in terms {
            let list = &self.postings[t as usize];
            let df = list.len();
            for &(doc, tf) in list {
                let slot = &mut scores[doc as usize];
                if *slot == S::zero() {
                    touched.push(doc);
                }
                *slot = *slot + params.term_score(tf, df, n, self.doc_lens[doc as usize], avg);
            }
        }
        let mut hits: Vec<(u32, S)> = touched
            .into_iter()
            .map(|d| (d, scores[d as usize]))
            .filter(|&(_, s)| s > S::zero())
            .collect();
        hits.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores").then(a.0.cmp(&b.0)));
        hits.truncate(k);
        Ok(hits
            .into_iter()
            .map(|(d, s)| (self.doc_ids[d as usize].clone(), s))
            .collect())
    }

    /// [`IndexHandle::search`] with default BM25 parameters and `f64` scores.
    pub fn bm25_search(&self, query: &Query, k: usize) -> Result<Vec<(String, f64)>> {
        self.search(&query.text, k, &Bm25Params::default())
    }

    /// Highest `tf-idf` terms over a set of documents, where a term's weight is
    /// its summed frequency in those documents times `ln(N / df)`. Ties break
    /// lexicographically.
    pub fn tfidf_top_terms<'a, I>(&self, doc_ids: I, k: usize, exclude: &HashSet<String>) -> Result<TermSelection>
    where
        I: IntoIterator<Item = &'a str>,
    {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "number of expansion terms must be at least 1".into(),
            ));
        }
        let mut docs = HashSet::new();
        let mut missing = 0;
        for id in doc_ids {
            match self.doc_lookup.get(id) {
                Some(&d) => {
                    docs.insert(d);
                }
                None => missing += 1,
            }
        }
        if missing > 0 {
            log::warn!("{missing} feedback documents not found in index {}", self.snapshot_id);
        }
        let mut tf_sums: HashMap<u32, u64> = HashMap::new();
        for d in docs {
            for &(t, tf) in &self.forward[d as usize] {
                *tf_sums.entry(t).or_default() += tf as u64;
            }
        }
        let n = self.doc_ids.len();
        let mut weighted: Vec<(&str, f64)> = tf_sums
            .into_iter()
            .map(|(t, tf)| (self.terms[t as usize].as_str(), tf, self.postings[t as usize].len()))
            .filter(|(term, _, _)| !exclude.contains(*term))
            .map(|(term, tf, df)| (term, tfidf_weight::<f64>(tf, df, n)))
            .collect();
        weighted.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite weights").then(a.0.cmp(b.0)));
        weighted.truncate(k);
        Ok(TermSelection {
            terms: weighted.into_iter().map(|(t, w)| (t.to_string(), w)).collect(),
            missing_docs: missing,
        })
    }
}

/// Builds an index and persists it into `out_dir`.
pub fn build_index<I>(snapshot_id: &str, docs: I, out_dir: &Path, config: TokenizerConfig) -> Result<IndexHandle>
where
    I: IntoIterator<Item = Document>,
{
    let mut index = IndexHandle::build(snapshot_id, docs, config)?;
    persist::write(&index, out_dir)?;
    index.path = Some(out_dir.to_path_buf());
    Ok(index)
}

/// Opens an index persisted by [`build_index`].
pub fn open_index(dir: &Path) -> Result<IndexHandle> {
    persist::read(dir)
}
