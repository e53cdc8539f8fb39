//! Ranking and thresholded evaluation metrics.
//!
//! Wherever a ranking is needed, items are ordered by descending score with
//! ties broken by ascending id, so results never depend on input order.

use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("labels, scores and ids differ in length ({labels}, {scores}, {ids})")]
    LengthMismatch { labels: usize, scores: usize, ids: usize },
    #[error("label {label} at position {index} is not 0 or 1")]
    InvalidLabel { index: usize, label: u8 },
    #[error("score at position {index} is not finite")]
    NonFiniteScore { index: usize },
    #[error("metric needs at least one positive item")]
    NoPositives,
    #[error("metric needs at least one negative item")]
    NoNegatives,
    #[error("fraction {0} is outside (0, 1]")]
    InvalidFraction(f64),
}

/// Scores of a test partition together with their labels and record ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    labels: Vec<u8>,
    scores: Vec<f64>,
    ids: Vec<usize>,
}

impl ScoredSet {
    pub fn new(labels: Vec<u8>, scores: Vec<f64>, ids: Vec<usize>) -> Result<Self, EvalError> {
        if labels.len() != scores.len() || labels.len() != ids.len() {
            return Err(EvalError::LengthMismatch {
                labels: labels.len(),
                scores: scores.len(),
                ids: ids.len(),
            });
        }
        if let Some(index) = labels.iter().position(|&l| l > 1) {
            return Err(EvalError::InvalidLabel { index, label: labels[index] });
        }
        if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
            return Err(EvalError::NonFiniteScore { index });
        }
        Ok(Self { labels, scores, ids })
    }

    /// Ids default to positions `0..n`.
    pub fn from_scores(labels: Vec<u8>, scores: Vec<f64>) -> Result<Self, EvalError> {
        let ids = (0..labels.len()).collect();
        Self::new(labels, scores, ids)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Positions sorted by descending score, ties by ascending id.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.scores[b].total_cmp(&self.scores[a]).then_with(|| self.ids[a].cmp(&self.ids[b]))
        });
        order
    }
}

/// Step-wise average precision, `Σ (R_n − R_{n−1}) P_n`.
pub fn average_precision(set: &ScoredSet) -> Result<f64, EvalError> {
    let positives = set.positives();
    if positives == 0 {
        return Err(EvalError::NoPositives);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in set.ranking().iter().enumerate() {
        if set.labels[i] == 1 {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / positives as f64)
}

/// Mann–Whitney AUC with average ranks for tied scores.
pub fn roc_auc(set: &ScoredSet) -> Result<f64, EvalError> {
    let positives = set.positives();
    let negatives = set.len() - positives;
    if positives == 0 {
        return Err(EvalError::NoPositives);
    }
    if negatives == 0 {
        return Err(EvalError::NoNegatives);
    }
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| set.scores[a].total_cmp(&set.scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && set.scores[order[end]].total_cmp(&set.scores[order[start]]) == Ordering::Equal
        {
            end += 1;
        }
        // 1-based ranks start+1..=end share their mean.
        let mean_rank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| set.labels[i] == 1).count();
        rank_sum += mean_rank * tied_pos as f64;
        start = end;
    }
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 when predicting positive for `score ≥ threshold`.
///
/// Zero denominators yield 0.
pub fn thresholded_prf(set: &ScoredSet, threshold: f64) -> Prf {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&label, &score) in set.labels.iter().zip(&set.scores) {
        match (score >= threshold, label == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Prf { precision, recall, f1 }
}

/// Size of the inspection budget: `max(1, ⌊fraction · n⌋)`.
pub fn budget(n: usize, fraction: f64) -> usize {
    (libm::floor(fraction * n as f64) as usize).max(1)
}

/// Share of all positives found among the top `budget(n, fraction)` items.
pub fn recall_at_fraction(set: &ScoredSet, fraction: f64) -> Result<f64, EvalError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(EvalError::InvalidFraction(fraction));
    }
    let positives = set.positives();
    if positives == 0 {
        return Err(EvalError::NoPositives);
    }
    let k = budget(set.len(), fraction);
    let found = set.ranking().iter().take(k).filter(|&&i| set.labels[i] == 1).count();
    Ok(found as f64 / positives as f64)
}
