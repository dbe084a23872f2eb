//! Synthetic minority oversampling and augmentation evaluation for imbalanced
//! binary classification.
//!
//! The crate covers the whole pipeline:
//!
//! * [`dataset`]: CSV ingestion, domain caps, stratified splitting and
//!   train-only standardization.
//! * [`neighbors`]: exact brute-force k-nearest-neighbor search.
//! * [`oversample`]: SMOTE, BorderlineSMOTE (borderline-1) and ADASYN at a
//!   requested multiplication factor.
//! * [`gbdt`]: class-weighted second-order gradient boosted trees.
//! * [`metrics`]: AUC, Gini, KS and ROC / Lorenz curve points.
//! * [`bootstrap`]: paired bootstrap comparison of two scorers.
//! * [`quality`]: per-feature distributional similarity of synthetic rows.
//! * [`harness`]: declarative experiment suites, ranking tables and sweeps.
//! * [`config`] and [`cli`]: JSON run configuration and the command line.

pub mod bootstrap;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod demo;
pub mod error;
pub mod gbdt;
pub mod harness;
pub mod metrics;
pub mod neighbors;
pub mod oversample;
pub mod quality;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
