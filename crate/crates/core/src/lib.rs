//! Smartphone-sensing analytics for mood-state studies: ingest of sensor and
//! exam files, per-day features, activity/state correlation, within-patient
//! naive Bayes recognition, default-state change detection, decision-level
//! fusion and a deterministic synthetic cohort generator.
//!
//! The numeric core (special functions, Pearson correlation, naive Bayes and
//! the Gaussian state model) is generic over [`Scalar`], implemented for `f32`
//! and `f64`. The aliases below fix the scalar to `f64`, which is what the
//! feature pipeline produces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod changedetect;
pub mod classifier;
pub mod config;
pub mod error;
pub mod features;
pub mod fusion;
pub mod ingest;
pub mod linalg;
mod na;
pub mod scalar;
pub mod special;
pub mod stats;
pub mod synth;
pub mod timeline;

pub use config::StudyConfig;
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type StateModel = changedetect::GaussianStateModel<f64>;
pub type NbModel = classifier::GaussianNbModel<f64>;
pub type Correlation = stats::CorrelationResult<f64>;
