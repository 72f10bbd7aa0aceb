use serde::{Deserialize, Serialize};

use super::{check_width, Classifier};
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    /// Sum of absolute differences.
    Manhattan,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }

    /// A monotone transform of the distance (squared for Euclidean).
    #[inline]
    pub fn score(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "manhattan" | "l1" | "cityblock" => Ok(Metric::Manhattan),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// Instance-based classifier storing every training row.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestNeighbor {
    k: usize,
    metric: Metric,
    columns: Vec<usize>,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl NearestNeighbor {
    pub fn fit(train: &Dataset, k: usize, metric: Metric) -> Result<NearestNeighbor> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(NearestNeighbor {
            k,
            metric,
            columns: train.schema().primary_indices(),
            rows: train.primary_matrix(),
            labels: train.labels(),
            n_classes: train.schema().n_classes(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Index of the stored row nearest to `x`; ties go to the earlier row.
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        check_width(self.columns.len(), x)?;
        let mut best = (f64::INFINITY, 0);
        for (i, r) in self.rows.iter().enumerate() {
            let d = self.metric.score(r, x);
            if d < best.0 {
                best = (d, i);
            }
        }
        Ok(best.1)
    }

    /// Predicts from a vector of primary features.
    ///
    /// With `k > 1` the majority label among the k nearest rows wins; a tied
    /// vote goes to the tied class whose member is nearest.
    pub fn predict_features(&self, x: &[f64]) -> Result<usize> {
        if self.k == 1 {
            return Ok(self.labels[self.nearest(x)?]);
        }
        check_width(self.columns.len(), x)?;
        let mut order: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (self.metric.score(r, x), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.n_classes];
        let neighbours = &order[..self.k.min(order.len())];
        for &(_, i) in neighbours {
            votes[self.labels[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        let winner = neighbours
            .iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&l| votes[l] == top)
            .expect("a neighbour carries the top vote");
        Ok(winner)
    }
}

impl Classifier for NearestNeighbor {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.columns.len()
    }

    fn predict(&self, obs: &Observation) -> Result<usize> {
        self.predict_features(&obs.select(&self.columns))
    }
}
