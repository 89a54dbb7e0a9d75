//! Experiment driver for the white-noise Schrödinger crate: batched spectra
//! over many seeds, statistical tests on the rescaled point process, limit
//! shape comparisons and the files a run leaves behind.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod config;
pub mod io;
pub mod manifest;
pub mod parallel;
pub mod report;
pub mod run;
pub mod stats;
pub mod suite;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad file format: {0}")]
    Format(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] crossover_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("insufficient data: {0}")]
    Insufficient(String),
}

pub use config::{Command, RunConfig, StatsVerb};
pub use manifest::RunManifest;
pub use report::{SeedSpan, TestReport};
