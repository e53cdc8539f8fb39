//! Lightweight function-level vulnerability triage for C/C++ sources.
//!
//! Every function is turned into two cheap, linear-time feature blocks:
//!
//! * TF-IDF weighted token n-grams over the raw text (comments kept), see
//!   [`lexer`] and [`vectorize`];
//! * five scalar code metrics computed on comment-stripped text, see
//!   [`metrics`].
//!
//! The blocks feed a class-weighted, L2-regularized logistic regression
//! ([`model`]) whose probabilities rank functions for human review. Ranking
//! quality is measured with the metrics in [`eval`]; [`corpus`] holds the
//! labeled-record type and the two split protocols, and [`detector`] wires the
//! pieces into one trainable unit.
//!
//! The crate is `#![no_std]` and only needs `alloc`. File formats, timing and
//! the command line live in the `vultriage` crate.

#![no_std]

extern crate alloc;

pub mod corpus;
pub mod detector;
pub mod eval;
pub mod lexer;
pub mod metrics;
pub mod model;
pub mod vectorize;

pub use corpus::{FunctionRecord, SplitKind, SplitResult};
pub use detector::Detector;
pub use eval::ScoredSet;
pub use lexer::TokenStream;
pub use metrics::MetricVector;
pub use model::{ClassWeights, TrainParams, TrainedModel};
pub use vectorize::{MaxAbsScale, SparseVector, TfidfModel, Variant};
