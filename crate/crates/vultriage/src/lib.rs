//! Experiment harness for lightweight function-level vulnerability triage.
//!
//! This crate adds what [`vultriage_core`] leaves out: reading Devign-style
//! datasets ([`corpus`]), timed experiment runs over split settings and
//! feature variants ([`pipeline`]), report files ([`report`]) and saved
//! detectors ([`bundle`]). The `vultriage` binary exposes all of it.

pub mod bundle;
pub mod corpus;
pub mod pipeline;
pub mod report;

pub use vultriage_core as core;
