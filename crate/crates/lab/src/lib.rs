//! Declarative experiment runner for Poisson hyperplane tessellations.
//!
//! Each experiment reads an [`ExperimentConfig`], draws its replicas on
//! independent random substreams and folds them in replica order, so a
//! config and seed determine the emitted [`ResultTable`] byte for byte.

pub mod config;
pub mod corpus;
pub mod experiments;
pub mod parallel;
pub mod plot;
pub mod stats;
pub mod table;

pub use config::{Experiment, ExperimentConfig, Stage};
pub use table::{Cell, ResultTable};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] mosaic_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
