//! Nearest-neighbour and linear-regression classifiers, per-context
//! classifier selection, and evaluation.

mod eval;
mod linear;
mod nn;
mod selection;

pub use eval::{evaluate, EvalResult};
pub use linear::{LinearDiagnostics, LinearModel};
pub use nn::{Metric, NearestNeighbor};
pub use selection::{ContextKey, SelectionModel};

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};

/// A fitted model that maps an observation's primary features to a class index.
pub trait Classifier {
    fn n_classes(&self) -> usize;

    /// Number of primary features the model expects.
    fn n_features(&self) -> usize;

    /// Predicts from an observation laid out like the training schema.
    fn predict(&self, obs: &Observation) -> Result<usize>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassifierKind {
    NearestNeighbor { k: usize, metric: Metric },
    Linear,
}

impl ClassifierKind {
    pub const ONE_NN: ClassifierKind = ClassifierKind::NearestNeighbor {
        k: 1,
        metric: Metric::Euclidean,
    };

    pub fn fit(&self, train: &Dataset) -> Result<Model> {
        Ok(match *self {
            ClassifierKind::NearestNeighbor { k, metric } => {
                Model::NearestNeighbor(NearestNeighbor::fit(train, k, metric)?)
            }
            ClassifierKind::Linear => Model::Linear(LinearModel::fit(train)?),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            ClassifierKind::NearestNeighbor { k: 1, metric } => format!("1-nn/{}", metric.name()),
            ClassifierKind::NearestNeighbor { k, metric } => format!("{k}-nn/{}", metric.name()),
            ClassifierKind::Linear => "mlr".into(),
        }
    }
}

/// Any fitted classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    NearestNeighbor(NearestNeighbor),
    Linear(LinearModel),
}

impl Classifier for Model {
    fn n_classes(&self) -> usize {
        match self {
            Model::NearestNeighbor(m) => m.n_classes(),
            Model::Linear(m) => m.n_classes(),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            Model::NearestNeighbor(m) => m.n_features(),
            Model::Linear(m) => m.n_features(),
        }
    }

    fn predict(&self, obs: &Observation) -> Result<usize> {
        match self {
            Model::NearestNeighbor(m) => m.predict(obs),
            Model::Linear(m) => m.predict(obs),
        }
    }
}

pub(crate) fn check_width(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Shape {
            expected,
            found: x.len(),
        });
    }
    Ok(())
}
