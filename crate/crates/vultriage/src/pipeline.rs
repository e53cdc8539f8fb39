//! Experiment orchestration: splits, variants, the renaming perturbation and
//! wall-clock timing.
//!
//! Timers follow three fixed boundaries:
//!
//! * feature time: code metrics over the whole dataset after comment
//!   stripping, measured once per invocation and shared by every row;
//! * train time: TF-IDF fitting (tokenization included), metric scaling and
//!   classifier optimization on the training partition;
//! * inference time: TF-IDF transformation and prediction on the test
//!   partition.
//!
//! Dataset I/O is outside all three. In renamed runs the renaming itself and
//! the recomputation of test metrics are outside the timers too.

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use log::info;
use thiserror::Error;
use vultriage_core::detector::{DetectorError, TrainingSet};
use vultriage_core::eval::{self, EvalError, ScoredSet};
use vultriage_core::lexer::rename_c_identifiers;
use vultriage_core::metrics::{extract_metrics, MetricVector};
use vultriage_core::model::TrainParams;
use vultriage_core::{Detector, Variant};

use crate::corpus::{
    cross_project_split, load_dataset, stratified_split, DatasetFormat, FunctionRecord, LoadError,
    SplitError, SplitResult,
};
use crate::report::ReportRow;

pub const SPLIT_FRACTIONS: [f64; 3] = [0.8, 0.1, 0.1];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Setting {
    /// Stratified 80/10/10 split of the whole corpus.
    Random,
    /// Train on one project, test on another.
    Cross { train_project: String, test_project: String },
}

impl Setting {
    pub fn name(&self) -> &'static str {
        match self {
            Setting::Random => "random",
            Setting::Cross { .. } => "cross",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Random => f.write_str("random"),
            Setting::Cross { train_project, test_project } => {
                write!(f, "cross ({train_project} -> {test_project})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub format: DatasetFormat,
    pub settings: Vec<Setting>,
    pub variants: Vec<Variant>,
    pub seed: u64,
    /// Also emit a row per variant with identifiers renamed in test sources.
    pub rename_test: bool,
    /// Inspection budget for Recall@k, as a fraction of the test partition.
    pub fraction: f64,
    pub threshold: f64,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub min_df: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: PathBuf::new(),
            format: DatasetFormat::JsonArray,
            settings: vec![Setting::Random],
            variants: Variant::ALL.to_vec(),
            seed: 42,
            rename_test: false,
            fraction: 0.10,
            threshold: 0.5,
            c: 1.0,
            tol: 1e-4,
            max_iter: 2000,
            min_df: 2,
        }
    }
}

impl ExperimentConfig {
    pub fn train_params(&self) -> TrainParams {
        TrainParams { c: self.c, tol: self.tol, max_iter: self.max_iter, seed: self.seed }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(PipelineError::Config(format!("fraction {} is outside (0, 1]", self.fraction)));
        }
        for s in &self.settings {
            if let Setting::Cross { train_project, test_project } = s {
                if train_project.is_empty() || test_project.is_empty() {
                    return Err(PipelineError::Config(
                        "the cross setting needs both a train and a test project".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{setting} split: {source}")]
    Split { setting: &'static str, source: SplitError },
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("{variant}: evaluation failed: {source}")]
    Eval { variant: Variant, source: EvalError },
}

/// Metrics of every record, computed once before any split.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedFeatures {
    pub metrics: Vec<MetricVector>,
    pub feat_time_s: f64,
}

impl SharedFeatures {
    pub fn extract(records: &[FunctionRecord]) -> Self {
        let start = Instant::now();
        let metrics = records.iter().map(|r| extract_metrics(&r.source)).collect();
        SharedFeatures { metrics, feat_time_s: start.elapsed().as_secs_f64() }
    }
}

pub fn make_split(
    records: &[FunctionRecord],
    setting: &Setting,
    seed: u64,
) -> Result<SplitResult, PipelineError> {
    let split = match setting {
        Setting::Random => stratified_split(records, SPLIT_FRACTIONS, seed),
        Setting::Cross { train_project, test_project } => {
            cross_project_split(records, train_project, test_project)
        }
    }
    .map_err(|source| PipelineError::Split { setting: setting.name(), source })?;
    info!(
        "{setting}: {} train / {} validation (unused) / {} test",
        split.train_ids.len(),
        split.val_ids.len(),
        split.test_ids.len()
    );
    Ok(split)
}

/// Result of one variant run: the report row and the detector behind it.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub row: ReportRow,
    pub detector: Detector,
    pub test_scores: Vec<f64>,
}

/// Trains `variant` on the training partition and evaluates it on the test
/// partition, optionally with identifiers renamed in the test sources only.
pub fn run_variant(
    config: &ExperimentConfig,
    records: &[FunctionRecord],
    shared: &SharedFeatures,
    setting: &Setting,
    split: &SplitResult,
    variant: Variant,
    renamed: bool,
) -> Result<VariantRun, PipelineError> {
    let train_sources: Vec<&str> = split.train_ids.iter().map(|&i| records[i].source.as_str()).collect();
    let train_metrics: Vec<MetricVector> = split.train_ids.iter().map(|&i| shared.metrics[i]).collect();
    let train_labels: Vec<u8> = split.train_ids.iter().map(|&i| records[i].label).collect();

    let start = Instant::now();
    let data = TrainingSet { sources: &train_sources, metrics: &train_metrics, labels: &train_labels };
    let detector = Detector::fit(variant, data, config.min_df, config.train_params())?;
    let train_time_s = start.elapsed().as_secs_f64();

    let (test_sources, test_metrics): (Vec<String>, Vec<MetricVector>) = if renamed {
        split
            .test_ids
            .iter()
            .map(|&i| {
                let text = rename_c_identifiers(&records[i].source);
                let metrics = extract_metrics(&text);
                (text, metrics)
            })
            .unzip()
    } else {
        split.test_ids.iter().map(|&i| (records[i].source.clone(), shared.metrics[i])).unzip()
    };

    let start = Instant::now();
    let test_scores = test_sources
        .iter()
        .zip(&test_metrics)
        .map(|(s, m)| detector.score(s, m))
        .collect::<Result<Vec<f64>, _>>()?;
    let infer_time_s = start.elapsed().as_secs_f64();

    let labels: Vec<u8> = split.test_ids.iter().map(|&i| records[i].label).collect();
    let eval_err = |source| PipelineError::Eval { variant, source };
    let set = ScoredSet::new(labels, test_scores.clone(), split.test_ids.clone()).map_err(eval_err)?;
    let prf = eval::thresholded_prf(&set, config.threshold);
    let row = ReportRow {
        setting: setting.name().to_string(),
        variant: variant.as_str().to_string(),
        renamed,
        pr_auc: eval::average_precision(&set).map_err(eval_err)?,
        roc_auc: eval::roc_auc(&set).map_err(eval_err)?,
        f1: prf.f1,
        precision: prf.precision,
        recall: prf.recall,
        recall_at_k: eval::recall_at_fraction(&set, config.fraction).map_err(eval_err)?,
        feat_time_s: shared.feat_time_s,
        train_time_s,
        infer_time_s,
        n_train: split.train_ids.len(),
        n_test: split.test_ids.len(),
        n_features: detector.n_features(),
    };
    info!(
        "{setting} {variant}{}: PR-AUC {:.3}, R@{:.0}% {:.3}, train {:.2}s, infer {:.2}s",
        if renamed { " (renamed)" } else { "" },
        row.pr_auc,
        config.fraction * 100.0,
        row.recall_at_k,
        train_time_s,
        infer_time_s
    );
    Ok(VariantRun { row, detector, test_scores })
}

/// Every requested setting × variant × rename state, in that order.
pub fn run_experiment_on(
    config: &ExperimentConfig,
    records: &[FunctionRecord],
) -> Result<Vec<ReportRow>, PipelineError> {
    config.validate()?;
    let mut variants = config.variants.clone();
    variants.sort();
    variants.dedup();
    if variants.is_empty() || config.settings.is_empty() {
        return Ok(Vec::new());
    }
    let shared = SharedFeatures::extract(records);
    info!("metric extraction over {} functions: {:.2}s", records.len(), shared.feat_time_s);

    let rename_states: &[bool] = if config.rename_test { &[false, true] } else { &[false] };
    let mut rows = Vec::new();
    for setting in &config.settings {
        let split = make_split(records, setting, config.seed)?;
        for &variant in &variants {
            for &renamed in rename_states {
                rows.push(run_variant(config, records, &shared, setting, &split, variant, renamed)?.row);
            }
        }
    }
    Ok(rows)
}

/// Loads the configured dataset and runs the experiment on it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReportRow>, PipelineError> {
    config.validate()?;
    let records = load_dataset(&config.dataset, config.format)?;
    info!("loaded {} functions from {}", records.len(), config.dataset.display());
    run_experiment_on(config, &records)
}
