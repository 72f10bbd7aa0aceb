//! Contextual expansion, contextual weighting, and the fixed
//! normalize -> expand -> weight preprocessing pipeline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureRole};
use crate::error::{Error, Result};
use crate::normalize::{
    fit_context_estimator, fit_plain, EstimatorKind, EstimatorOptions, NormalizationModel,
    PlainMethod,
};
use crate::stats::{mean, sample_std, SIGMA_FLOOR};

/// Appends the named contextual columns to the primary block.
///
/// The result lists the original primaries first, then the selected
/// columns (re-labelled primary), then everything else.
pub fn expand(dataset: &Dataset, contextual_columns: &[&str]) -> Result<Dataset> {
    let schema = dataset.schema();
    let mut selected = Vec::with_capacity(contextual_columns.len());
    for name in contextual_columns {
        let idx = schema.column_index(name)?;
        let col = &schema.columns()[idx];
        if col.role != FeatureRole::Contextual {
            return Err(Error::WrongRole {
                name: col.name.clone(),
                expected: FeatureRole::Contextual,
                found: col.role,
            });
        }
        if !selected.contains(&idx) {
            selected.push(idx);
        }
    }
    if selected.is_empty() {
        return Ok(dataset.clone());
    }
    let mut order = schema.primary_indices();
    order.extend(&selected);
    order.extend(
        (0..schema.len())
            .filter(|i| !order.contains(i))
            .collect::<Vec<_>>(),
    );
    let mut out = dataset.select_columns(&order);
    let mut columns = out.schema().columns().to_vec();
    let n_primary = schema.primary_indices().len();
    for c in &mut columns[n_primary..n_primary + selected.len()] {
        c.role = FeatureRole::Primary;
    }
    let schema = out.schema().with_columns(columns);
    out = Dataset::from_parts(schema, out.observations().to_vec());
    Ok(out)
}

/// Positive, finite per-feature multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Config(format!(
                "weights must be positive and finite, got {w}"
            )));
        }
        Ok(WeightVector(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Extends with unit weights up to `n` features.
    pub fn padded(&self, n: usize) -> WeightVector {
        let mut w = self.0.clone();
        w.resize(n.max(w.len()), 1.0);
        WeightVector(w)
    }
}

/// Elementwise product.
pub fn apply_weights(w: &WeightVector, x: &[f64]) -> Result<Vec<f64>> {
    if w.len() != x.len() {
        return Err(Error::Shape {
            expected: w.len(),
            found: x.len(),
        });
    }
    Ok(x.iter().zip(&w.0).map(|(x, w)| x * w).collect())
}

/// Ratio of inter-class to intra-class deviation for each primary feature.
///
/// Intra-class deviation averages the stddev within every (group, class)
/// cell; inter-class deviation averages, over groups, the stddev of all of a
/// group's rows pooled across classes.
pub fn compute_weights(train: &Dataset) -> Result<WeightVector> {
    let primary = train.schema().primary_indices();
    if primary.is_empty() {
        return Err(Error::NoColumnsWithRole(FeatureRole::Primary));
    }
    let mut groups: BTreeMap<u32, Vec<Vec<f64>>> = BTreeMap::new();
    let mut cells: BTreeMap<(u32, usize), Vec<Vec<f64>>> = BTreeMap::new();
    for o in train.observations() {
        let g = o.group.ok_or(Error::MissingGroup)?;
        let x = o.select(&primary);
        groups.entry(g).or_default().push(x.clone());
        cells.entry((g, o.label)).or_default().push(x);
    }
    let mut small: Vec<String> = cells
        .iter()
        .filter(|(_, rows)| rows.len() < 2)
        .map(|((g, c), rows)| format!("group {g} class {c} ({} row)", rows.len()))
        .collect();
    small.extend(
        groups
            .iter()
            .filter(|(_, rows)| rows.len() < 2)
            .map(|(g, rows)| format!("group {g} ({} row)", rows.len())),
    );
    if !small.is_empty() {
        return Err(Error::InsufficientData(format!(
            "weighting needs >= 2 rows per cell: {}",
            small.join(", ")
        )));
    }

    let column_std = |rows: &[Vec<f64>], j: usize| {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        sample_std(&col)
    };
    let weights = (0..primary.len())
        .map(|j| {
            let inter: Vec<f64> = groups.values().map(|rows| column_std(rows, j)).collect();
            let intra: Vec<f64> = cells.values().map(|rows| column_std(rows, j)).collect();
            mean(&inter).max(SIGMA_FLOOR) / mean(&intra).max(SIGMA_FLOOR)
        })
        .collect();
    WeightVector::new(weights)
}

/// Which normalization the pipeline's first stage performs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum NormalizationStage {
    Plain {
        method: PlainMethod,
    },
    Contextual {
        kind: EstimatorKind,
        options: EstimatorOptions,
    },
}

impl NormalizationStage {
    pub fn group_stats() -> Self {
        NormalizationStage::Contextual {
            kind: EstimatorKind::GroupStats,
            options: EstimatorOptions::default(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            NormalizationStage::Plain { method } => method.name().to_string(),
            NormalizationStage::Contextual { kind, options } => match kind {
                EstimatorKind::KnnRegress => format!("contextual-knn(k={})", options.k),
                _ => format!("contextual-{}", kind.name()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub normalization: Option<NormalizationStage>,
    /// Contextual columns appended to the primary block.
    pub expand: Vec<String>,
    pub weighting: bool,
}

impl PipelineConfig {
    /// Stage order as applied, for reports.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(n) = &self.normalization {
            parts.push(format!("normalize[{}]", n.describe()));
        }
        if !self.expand.is_empty() {
            parts.push(format!("expand[{}]", self.expand.join("+")));
        }
        if self.weighting {
            parts.push("weight".to_string());
        }
        if parts.is_empty() {
            "raw".into()
        } else {
            parts.join(" -> ")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Train,
    Test,
}

/// A pipeline with its training-side artifacts fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    config: PipelineConfig,
    normalizer: Option<NormalizationModel>,
    weights: Option<WeightVector>,
}

impl Pipeline {
    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn normalizer(&self) -> Option<&NormalizationModel> {
        self.normalizer.as_ref()
    }

    pub fn weights(&self) -> Option<&WeightVector> {
        self.weights.as_ref()
    }

    fn normalize(&self, dataset: &Dataset, side: Side) -> Result<Dataset> {
        match (&self.normalizer, &self.config.normalization) {
            (
                Some(_),
                Some(NormalizationStage::Contextual {
                    kind: EstimatorKind::GroupStats,
                    options,
                }),
            ) if side == Side::Test => {
                // unseen test groups: statistics come from their own rows (features only)
                let est = fit_context_estimator(dataset, EstimatorKind::GroupStats, options)?;
                NormalizationModel::contextual(est).apply_dataset(dataset)
            }
            (Some(model), _) => model.apply_dataset(dataset),
            (None, _) => Ok(dataset.clone()),
        }
    }
}

fn fit_normalizer(train: &Dataset, stage: &NormalizationStage) -> Result<NormalizationModel> {
    match stage {
        NormalizationStage::Plain { method } => fit_plain(train, *method),
        NormalizationStage::Contextual { kind, options } => {
            fit_context_estimator(train, *kind, options).map(NormalizationModel::contextual)
        }
    }
}

pub fn build_pipeline(train: &Dataset, config: &PipelineConfig) -> Result<Pipeline> {
    let normalizer = config
        .normalization
        .as_ref()
        .map(|stage| fit_normalizer(train, stage))
        .transpose()?;
    let weights = if config.weighting {
        let normalized = match &normalizer {
            Some(m) => m.apply_dataset(train)?,
            None => train.clone(),
        };
        Some(compute_weights(&normalized)?)
    } else {
        None
    };
    Ok(Pipeline {
        config: config.clone(),
        normalizer,
        weights,
    })
}

pub fn run_pipeline(pipeline: &Pipeline, dataset: &Dataset, side: Side) -> Result<Dataset> {
    let normalized = pipeline.normalize(dataset, side)?;
    let names: Vec<&str> = pipeline.config.expand.iter().map(String::as_str).collect();
    let expanded = expand(&normalized, &names)?;
    let Some(w) = &pipeline.weights else {
        return Ok(expanded);
    };
    let primary = expanded.schema().primary_indices();
    let w = w.padded(primary.len());
    if w.len() != primary.len() {
        return Err(Error::Shape {
            expected: w.len(),
            found: primary.len(),
        });
    }
    let schema = expanded.schema().clone();
    expanded.map_observations(schema, |o| {
        let mut out = o.clone();
        let weighted = apply_weights(&w, &o.select(&primary))?;
        for (&c, v) in primary.iter().zip(weighted) {
            out.features[c] = v;
        }
        Ok(out)
    })
}
