use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResult {
    pub correct: usize,
    pub total: usize,
    /// `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

impl EvalResult {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.correct as f64 / self.total as f64
    }

    /// Accumulates another fold's counts.
    pub fn merge(&mut self, other: &EvalResult) {
        self.correct += other.correct;
        self.total += other.total;
        for (row, o) in self.confusion.iter_mut().zip(&other.confusion) {
            for (a, b) in row.iter_mut().zip(o) {
                *a += b;
            }
        }
    }
}

/// Counts correct predictions on `test`.
pub fn evaluate<C: Classifier + ?Sized>(model: &C, test: &Dataset) -> Result<EvalResult> {
    let n_classes = model.n_classes();
    if test.schema().n_classes() != n_classes {
        return Err(Error::SchemaMismatch(format!(
            "model knows {n_classes} classes, test set has {}",
            test.schema().n_classes()
        )));
    }
    let width = test.schema().primary_indices().len();
    if width != model.n_features() {
        return Err(Error::SchemaMismatch(format!(
            "model expects {} primary features, test set has {width}",
            model.n_features()
        )));
    }
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    let mut correct = 0;
    for obs in test.observations() {
        let p = model.predict(obs)?;
        confusion[obs.label][p] += 1;
        if p == obs.label {
            correct += 1;
        }
    }
    Ok(EvalResult {
        correct,
        total: test.len(),
        confusion,
    })
}
