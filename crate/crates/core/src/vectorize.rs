//! TF-IDF vocabulary fitting, max-abs metric scaling and feature assembly.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::for_each_ngram;
use crate::metrics::MetricVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorizeError {
    #[error("cannot fit on an empty collection")]
    EmptyInput,
    #[error("invalid n-gram range ({n_min}, {n_max})")]
    InvalidNgramRange { n_min: usize, n_max: usize },
    #[error("vocabulary is empty after applying min_df={min_df} to {n_docs} documents")]
    EmptyVocabulary { min_df: usize, n_docs: usize },
    #[error("variant {variant} needs {missing} features")]
    MissingBlock { variant: Variant, missing: &'static str },
}

/// Sparse feature vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    /// Builds a vector from `(index, value)` pairs in any order.
    ///
    /// Duplicate indices are summed; zeros are dropped.
    ///
    /// # Panics
    ///
    /// If an index is out of range.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            assert!(i < dim, "index {i} out of range for dimension {dim}");
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Self { dim, entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect();
        Self { dim: values.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries.binary_search_by_key(&index, |&(i, _)| i).map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|(_, v)| v * v).sum())
    }

    /// Dot product with a dense vector; indices past its end contribute 0.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense.get(i).map_or(0.0, |w| v * w)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.is_finite())
    }
}

/// The four feature variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "metrics")]
    Metrics,
    #[serde(rename = "tok-u")]
    TokU,
    #[serde(rename = "tok-ub")]
    TokUb,
    #[serde(rename = "mix")]
    Mix,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Metrics, Variant::TokU, Variant::TokUb, Variant::Mix];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Metrics => "metrics",
            Variant::TokU => "tok-u",
            Variant::TokUb => "tok-ub",
            Variant::Mix => "mix",
        }
    }

    /// N-gram range of the token block, or `None` for metrics only.
    pub fn ngram_range(self) -> Option<(usize, usize)> {
        match self {
            Variant::Metrics => None,
            Variant::TokU => Some((1, 1)),
            Variant::TokUb | Variant::Mix => Some((1, 2)),
        }
    }

    pub fn uses_tokens(self) -> bool {
        self.ngram_range().is_some()
    }

    pub fn uses_metrics(self) -> bool {
        matches!(self, Variant::Metrics | Variant::Mix)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown variant `{0}` (expected metrics, tok-u, tok-ub or mix)")]
pub struct ParseVariantError(pub String);

impl FromStr for Variant {
    type Err = ParseVariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseVariantError(String::from(s)))
    }
}

/// Fitted TF-IDF vocabulary.
///
/// Column indices follow byte-wise lexicographic order of the terms, and
/// `idf[t] = ln((1 + N) / (1 + df[t])) + 1`. Transformed vectors use raw term
/// counts and are L2-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    vocabulary: BTreeMap<String, usize>,
    df: Vec<usize>,
    idf: Vec<f64>,
    n_docs: usize,
    n_min: usize,
    n_max: usize,
    min_df: usize,
}

pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    libm::log((1.0 + n_docs as f64) / (1.0 + df as f64)) + 1.0
}

/// Fits a vocabulary over token streams of the training documents.
pub fn fit_tfidf<D: AsRef<[T]>, T: AsRef<str>>(
    docs: &[D],
    n_min: usize,
    n_max: usize,
    min_df: usize,
) -> Result<TfidfModel, VectorizeError> {
    if docs.is_empty() {
        return Err(VectorizeError::EmptyInput);
    }
    if n_min == 0 || n_min > n_max {
        return Err(VectorizeError::InvalidNgramRange { n_min, n_max });
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen: Vec<String> = Vec::new();
    let mut toks: Vec<&str> = Vec::new();
    for doc in docs {
        toks.clear();
        toks.extend(doc.as_ref().iter().map(|t| t.as_ref()));
        seen.clear();
        for_each_ngram(&toks, n_min, n_max, |g| seen.push(String::from(g)));
        seen.sort_unstable();
        seen.dedup();
        for term in seen.drain(..) {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    df.retain(|_, &mut count| count >= min_df);
    if df.is_empty() {
        return Err(VectorizeError::EmptyVocabulary { min_df, n_docs: docs.len() });
    }
    let n_docs = docs.len();
    let mut vocabulary = BTreeMap::new();
    let mut dfs = Vec::with_capacity(df.len());
    let mut idf = Vec::with_capacity(df.len());
    for (index, (term, count)) in df.into_iter().enumerate() {
        vocabulary.insert(term, index);
        dfs.push(count);
        idf.push(smoothed_idf(n_docs, count));
    }
    Ok(TfidfModel { vocabulary, df: dfs, idf, n_docs, n_min, n_max, min_df })
}

impl TfidfModel {
    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.idf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idf.is_empty()
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn document_frequencies(&self) -> &[usize] {
        &self.df
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.vocabulary.get(term).copied()
    }

    /// Maps one document to its L2-normalized TF-IDF vector.
    ///
    /// Out-of-vocabulary n-grams are ignored; a document with no known term
    /// maps to the zero vector.
    pub fn transform<T: AsRef<str>>(&self, doc: &[T]) -> SparseVector {
        let toks: Vec<&str> = doc.iter().map(|t| t.as_ref()).collect();
        let mut hits: Vec<usize> = Vec::new();
        for_each_ngram(&toks, self.n_min, self.n_max, |g| {
            if let Some(&i) = self.vocabulary.get(g) {
                hits.push(i);
            }
        });
        hits.sort_unstable();
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for i in hits {
            match entries.last_mut() {
                Some((j, count)) if *j == i => *count += 1.0,
                _ => entries.push((i, 1.0)),
            }
        }
        for (i, v) in entries.iter_mut() {
            *v *= self.idf[*i];
        }
        let norm = libm::sqrt(entries.iter().map(|(_, v)| v * v).sum());
        if norm > 0.0 {
            for (_, v) in entries.iter_mut() {
                *v /= norm;
            }
        }
        SparseVector { dim: self.len(), entries }
    }
}

/// Per-column max-abs scale factors fitted on training metric rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxAbsScale {
    factors: [f64; MetricVector::LEN],
}

impl MaxAbsScale {
    pub fn factors(&self) -> &[f64; MetricVector::LEN] {
        &self.factors
    }

    /// Divides each column by its factor. Values may exceed 1 for unseen rows.
    pub fn apply(&self, row: &MetricVector) -> [f64; MetricVector::LEN] {
        let mut out = row.to_array();
        for (v, f) in out.iter_mut().zip(self.factors) {
            *v /= f;
        }
        out
    }
}

/// Column-wise maximum absolute value; all-zero columns get factor 1.
pub fn fit_maxabs(rows: &[MetricVector]) -> Result<MaxAbsScale, VectorizeError> {
    if rows.is_empty() {
        return Err(VectorizeError::EmptyInput);
    }
    let mut factors = [0.0f64; MetricVector::LEN];
    for row in rows {
        for (f, v) in factors.iter_mut().zip(row.to_array()) {
            *f = f.max(libm::fabs(v));
        }
    }
    for f in factors.iter_mut() {
        if *f == 0.0 {
            *f = 1.0;
        }
    }
    Ok(MaxAbsScale { factors })
}

/// Builds the classifier input for one function.
///
/// `mix` places the TF-IDF block first and the five scaled metrics after it.
pub fn assemble_features(
    variant: Variant,
    tfidf: Option<&SparseVector>,
    scaled_metrics: Option<&[f64; MetricVector::LEN]>,
) -> Result<SparseVector, VectorizeError> {
    let need_tokens = || VectorizeError::MissingBlock { variant, missing: "token" };
    let need_metrics = || VectorizeError::MissingBlock { variant, missing: "metric" };
    match variant {
        Variant::Metrics => Ok(SparseVector::from_dense(scaled_metrics.ok_or_else(need_metrics)?)),
        Variant::TokU | Variant::TokUb => Ok(tfidf.ok_or_else(need_tokens)?.clone()),
        Variant::Mix => {
            let tokens = tfidf.ok_or_else(need_tokens)?;
            let metrics = scaled_metrics.ok_or_else(need_metrics)?;
            let offset = tokens.dim;
            let mut entries = tokens.entries.clone();
            entries
                .extend(metrics.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (offset + i, v)));
            Ok(SparseVector { dim: offset + MetricVector::LEN, entries })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol
    }

    fn toy() -> Vec<Vec<&'static str>> {
        vec![vec!["a", "b"], vec!["a", "c"]]
    }

    #[test]
    fn min_df_two_keeps_shared_term() {
        let m = fit_tfidf(&toy(), 1, 1, 2).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.index_of("a"), Some(0));
        assert_eq!(m.idf()[0], 1.0);
    }

    #[test]
    fn min_df_one_idf_and_transform() {
        let m = fit_tfidf(&toy(), 1, 1, 1).unwrap();
        assert_eq!(m.len(), 3);
        assert!(close(m.idf()[m.index_of("b").unwrap()], 1.405465, 1e-6));
        let v = m.transform(&["a", "b"]);
        assert!(close(v.get(m.index_of("a").unwrap()), 0.579739, 1e-6));
        assert!(close(v.get(m.index_of("b").unwrap()), 0.814802, 1e-6));
        assert!(close(v.norm(), 1.0, 1e-12));
    }

    #[test]
    fn single_doc_with_min_df_two_fails() {
        let err = fit_tfidf(&[vec!["a", "a", "b"]], 1, 1, 2).unwrap_err();
        assert!(matches!(err, VectorizeError::EmptyVocabulary { .. }));
    }

    #[test]
    fn empty_corpus_fails() {
        let docs: Vec<Vec<&str>> = Vec::new();
        assert_eq!(fit_tfidf(&docs, 1, 1, 1).unwrap_err(), VectorizeError::EmptyInput);
    }

    #[test]
    fn oov_document_is_zero() {
        let m = fit_tfidf(&toy(), 1, 1, 1).unwrap();
        let v = m.transform(&["zzz", "q"]);
        assert_eq!(v.nnz(), 0);
        assert_eq!(v.dim(), 3);
    }

    #[test]
    fn single_term_normalizes_to_one() {
        let m = fit_tfidf(&toy(), 1, 1, 2).unwrap();
        assert_eq!(m.transform(&["a"]).entries(), &[(0, 1.0)]);
    }

    #[test]
    fn vocabulary_is_lexicographic() {
        let m = fit_tfidf(&[vec!["b", "a", "B"], vec!["a", "b", "B"]], 1, 2, 1).unwrap();
        let terms: Vec<&str> = m.vocabulary().keys().map(|s| s.as_str()).collect();
        assert_eq!(terms, ["B", "a", "a B", "a b", "b", "b B", "b a"]);
        for (i, t) in terms.iter().enumerate() {
            assert_eq!(m.index_of(t), Some(i));
        }
    }

    #[test]
    fn maxabs_examples() {
        let rows = [
            MetricVector { nloc: 2, ccn: 1, token_count: 4, max_depth: 1, param_count: 0 },
            MetricVector { nloc: 6, ccn: 3, token_count: 8, max_depth: 2, param_count: 0 },
        ];
        let s = fit_maxabs(&rows).unwrap();
        assert_eq!(s.factors(), &[6.0, 3.0, 8.0, 2.0, 1.0]);
        assert_eq!(s.apply(&rows[1]), [1.0, 1.0, 1.0, 1.0, 0.0]);
        let big = MetricVector { nloc: 12, ..Default::default() };
        assert_eq!(s.apply(&big)[0], 2.0);
        assert_eq!(s.apply(&MetricVector::default()), [0.0; 5]);
        for row in &rows {
            assert!(s.apply(row).iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        assert_eq!(fit_maxabs(&[]).unwrap_err(), VectorizeError::EmptyInput);
    }

    #[test]
    fn maxabs_single_row() {
        let row = MetricVector { nloc: 3, ccn: 1, token_count: 0, max_depth: 0, param_count: 2 };
        assert_eq!(fit_maxabs(&[row]).unwrap().factors(), &[3.0, 1.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn assemble_layouts() {
        let tf = SparseVector::from_pairs(3, vec![(0, 0.5)]);
        let m = [1.0, 0.0, 0.0, 0.0, 0.0];
        let mix = assemble_features(Variant::Mix, Some(&tf), Some(&m)).unwrap();
        assert_eq!(mix.dim(), 8);
        assert_eq!(mix.entries(), &[(0, 0.5), (3, 1.0)]);
        assert_eq!(assemble_features(Variant::Metrics, None, Some(&m)).unwrap().dim(), 5);
        let zero = SparseVector::zeros(3);
        let tok = assemble_features(Variant::TokU, Some(&zero), None).unwrap();
        assert_eq!((tok.dim(), tok.nnz()), (3, 0));
        assert!(matches!(
            assemble_features(Variant::Mix, Some(&tf), None),
            Err(VectorizeError::MissingBlock { missing: "metric", .. })
        ));
        assert!(assemble_features(Variant::TokUb, None, Some(&m)).is_err());
    }

    #[test]
    fn variant_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("tok".parse::<Variant>().is_err());
    }

    #[test]
    fn sparse_from_pairs_merges() {
        let v = SparseVector::from_pairs(4, vec![(2, 1.0), (0, 0.0), (2, 2.0), (1, -1.0)]);
        assert_eq!(v.entries(), &[(1, -1.0), (2, 3.0)]);
        assert_eq!(v.to_dense(), vec![0.0, -1.0, 3.0, 0.0]);
    }
}
