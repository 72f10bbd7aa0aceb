//! Classification with context-sensitive features.
//!
//! Features are split into *primary* features, which carry class
//! information on their own, and *contextual* features (speaker, ambient
//! temperature) that change how primary features should be read. This crate
//! provides:
//!
//! - [`featrole`]: detect primary / contextual / irrelevant features on
//!   discrete data, plus context-sensitivity between pairs.
//! - [`normalize`]: min/max, mean/stddev, percentile and baseline
//!   normalization, and contextual normalization `(x - mu(c)) / sigma(c)`
//!   with group, k-nearest-neighbour or linear-regression estimators.
//! - [`strategies`]: contextual expansion, contextual weighting and the
//!   fixed normalize -> expand -> weight pipeline.
//! - [`classify`]: nearest-neighbour and linear-regression classifiers,
//!   per-context classifier selection and evaluation.
//! - [`data`]: the vowel data loader, a seeded context-shift generator and
//!   a CSV interchange format.
//! - [`experiment`] and [`report`]: the experiment drivers behind the CLI.

pub mod classify;
pub mod data;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod featrole;
pub mod linalg;
pub mod normalize;
pub mod report;
pub mod stats;
pub mod strategies;

pub use dataset::{Column, Dataset, FeatureKind, FeatureRole, FeatureSchema, Observation};
pub use error::{Error, Result};
