//! One trainable scoring unit: feature extraction for a variant plus the
//! fitted classifier.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::tokenize;
use crate::metrics::MetricVector;
use crate::model::{compute_class_weights, train_logreg, ModelError, TrainParams, TrainedModel};
use crate::vectorize::{
    assemble_features, fit_maxabs, fit_tfidf, MaxAbsScale, SparseVector, TfidfModel, Variant, VectorizeError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectorError {
    #[error("{variant}: {source}")]
    Vectorize { variant: Variant, source: VectorizeError },
    #[error("{variant}: {source}")]
    Model { variant: Variant, source: ModelError },
    #[error("{sources} sources, {metrics} metric rows and {labels} labels do not line up")]
    LengthMismatch { sources: usize, metrics: usize, labels: usize },
}

/// Training inputs, one entry per function in parallel slices.
#[derive(Debug, Clone, Copy)]
pub struct TrainingSet<'a, S> {
    /// Raw function text (comments included) for the token block.
    pub sources: &'a [S],
    /// Metrics of the same functions.
    pub metrics: &'a [MetricVector],
    pub labels: &'a [u8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub variant: Variant,
    pub tfidf: Option<TfidfModel>,
    pub scale: Option<MaxAbsScale>,
    pub model: TrainedModel,
}

impl Detector {
    /// Fits the TF-IDF block (token variants), the metric scale (metric
    /// variants), balanced class weights and the classifier.
    pub fn fit<S: AsRef<str>>(
        variant: Variant,
        data: TrainingSet<'_, S>,
        min_df: usize,
        params: TrainParams,
    ) -> Result<Self, DetectorError> {
        let n = data.labels.len();
        if data.sources.len() != n || data.metrics.len() != n {
            return Err(DetectorError::LengthMismatch {
                sources: data.sources.len(),
                metrics: data.metrics.len(),
                labels: n,
            });
        }
        let vec_err = |source| DetectorError::Vectorize { variant, source };
        let model_err = |source| DetectorError::Model { variant, source };

        let (tfidf, token_rows) = match variant.ngram_range() {
            Some((n_min, n_max)) => {
                let docs: Vec<Vec<&str>> =
                    data.sources.iter().map(|s| tokenize(s.as_ref()).into_vec()).collect();
                let tfidf = fit_tfidf(&docs, n_min, n_max, min_df).map_err(vec_err)?;
                let rows: Vec<SparseVector> = docs.iter().map(|d| tfidf.transform(d)).collect();
                (Some(tfidf), Some(rows))
            }
            None => (None, None),
        };
        let scale =
            if variant.uses_metrics() { Some(fit_maxabs(data.metrics).map_err(vec_err)?) } else { None };

        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let scaled = scale.as_ref().map(|s| s.apply(&data.metrics[i]));
            let tok = token_rows.as_ref().map(|r| &r[i]);
            rows.push(assemble_features(variant, tok, scaled.as_ref()).map_err(vec_err)?);
        }
        let class_weights = compute_class_weights(data.labels).map_err(model_err)?;
        let model = train_logreg(&rows, data.labels, class_weights, params).map_err(model_err)?;
        Ok(Detector { variant, tfidf, scale, model })
    }

    pub fn n_features(&self) -> usize {
        self.model.dim()
    }

    /// Feature vector of one function under the fitted transforms.
    pub fn features(&self, source: &str, metrics: &MetricVector) -> Result<SparseVector, DetectorError> {
        let tok = self.tfidf.as_ref().map(|t| t.transform(&tokenize(source)));
        let scaled = self.scale.as_ref().map(|s| s.apply(metrics));
        assemble_features(self.variant, tok.as_ref(), scaled.as_ref())
            .map_err(|source| DetectorError::Vectorize { variant: self.variant, source })
    }

    /// Predicted probability that the function is vulnerable.
    pub fn score(&self, source: &str, metrics: &MetricVector) -> Result<f64, DetectorError> {
        Ok(self.model.predict_proba(&self.features(source, metrics)?))
    }
}
