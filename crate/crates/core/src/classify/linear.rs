use nalgebra::DMatrix;

use super::{check_width, Classifier};
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::linalg::{design_with_intercept, solve_least_squares};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearDiagnostics {
    pub rank: usize,
    /// Rank of a full-rank design: features + 1.
    pub full_rank: usize,
    pub rank_deficient: bool,
    /// Residual norm of each class's indicator fit.
    pub residual_norms: Vec<f64>,
}

/// One-vs-rest indicator regression with argmax decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    columns: Vec<usize>,
    /// Per class: intercept followed by one coefficient per feature.
    coefficients: Vec<Vec<f64>>,
    diagnostics: LinearDiagnostics,
}

impl LinearModel {
    pub fn fit(train: &Dataset) -> Result<LinearModel> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let columns = train.schema().primary_indices();
        let p = columns.len();
        let n_classes = train.schema().n_classes();
        if train.len() < p + 2 {
            log::warn!(
                "linear model fitted on {} rows for {p} features",
                train.len()
            );
        }
        let design = design_with_intercept(&train.primary_matrix(), p);
        let labels = train.labels();
        let targets = DMatrix::from_fn(train.len(), n_classes, |i, c| {
            if labels[i] == c {
                1.0
            } else {
                0.0
            }
        });
        let ls = solve_least_squares(&design, &targets);
        if ls.rank_deficient {
            log::warn!(
                "design matrix has rank {} < {}; using minimum-norm solution",
                ls.rank,
                p + 1
            );
        }
        let coefficients = (0..n_classes)
            .map(|c| ls.coefficients.column(c).iter().copied().collect())
            .collect();
        Ok(LinearModel {
            columns,
            coefficients,
            diagnostics: LinearDiagnostics {
                rank: ls.rank,
                full_rank: p + 1,
                rank_deficient: ls.rank_deficient,
                residual_norms: ls.residual_norms,
            },
        })
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn diagnostics(&self) -> &LinearDiagnostics {
        &self.diagnostics
    }

    /// Fitted indicator response of every class.
    pub fn responses(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_width(self.columns.len(), x)?;
        Ok(self
            .coefficients
            .iter()
            .map(|b| b[0] + b[1..].iter().zip(x).map(|(b, x)| b * x).sum::<f64>())
            .collect())
    }

    /// Class with the largest response; ties go to the lower class index.
    pub fn predict_features(&self, x: &[f64]) -> Result<usize> {
        let r = self.responses(x)?;
        let mut best = 0;
        for (c, &v) in r.iter().enumerate() {
            if v > r[best] {
                best = c;
            }
        }
        Ok(best)
    }
}

impl Classifier for LinearModel {
    fn n_classes(&self) -> usize {
        self.coefficients.len()
    }

    fn n_features(&self) -> usize {
        self.columns.len()
    }

    fn predict(&self, obs: &Observation) -> Result<usize> {
        self.predict_features(&obs.select(&self.columns))
    }
}
